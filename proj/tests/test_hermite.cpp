#include "gkdiff/errors.hpp"
#include "gkdiff/hermite.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace gkdiff;

namespace {

// psi_k and its derivatives at a point z, evaluated directly.
struct PointEval {
  double value;
  Vector grad;
  Matrix hess;
};

PointEval evaluate(const MultiIndex& k, const Vector& z, double beta) {
  const auto d = static_cast<Eigen::Index>(k.size());
  const double sb = std::sqrt(beta);
  std::vector<oracle::HermiteValue> f;
  double norm = 1.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    f.push_back(oracle::hermite_all(k[static_cast<std::size_t>(i)], sb * z(i)));
    norm *= std::sqrt(oracle::factorial(k[static_cast<std::size_t>(i)]));
  }
  PointEval out{1.0, Vector::Ones(d), Matrix::Ones(d, d)};
  for (Eigen::Index i = 0; i < d; ++i) {
    out.value *= f[i].value;
    for (Eigen::Index a = 0; a < d; ++a) {
      out.grad(a) *= (a == i) ? sb * f[i].d1 : f[i].value;
      for (Eigen::Index b = 0; b < d; ++b) {
        double factor = f[i].value;
        if (a == i && b == i) {
          factor = beta * f[i].d2;
        } else if (a == i || b == i) {
          factor = sb * f[i].d1;
        }
        out.hess(a, b) *= factor;
      }
    }
  }
  out.value /= norm;
  out.grad /= norm;
  out.hess /= norm;
  return out;
}

// (psi_m, L psi_k) by tensor Gauss-Hermite quadrature of pointwise values.
Matrix quadrature_generator(const LinearGaussianModel& model, const HermiteBasis& basis, int nodes) {
  const oracle::Quadrature q = oracle::gauss_hermite(nodes);
  const int d = basis.dim();
  const double beta = basis.beta();
  const Matrix& B = model.drift();
  const Matrix Q = model.diffusion();
  const Eigen::Index n = basis.size();
  Matrix E = Matrix::Zero(n, n);
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  while (true) {
    Vector z(d);
    double w = 1.0;
    for (int i = 0; i < d; ++i) {
      z(i) = q.nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] / std::sqrt(beta);
      w *= q.weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
    }
    std::vector<PointEval> evals;
    for (Eigen::Index k = 0; k < n; ++k) evals.push_back(evaluate(basis.index(k), z, beta));
    const Vector drift = B * z;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double Lk = drift.dot(evals[k].grad) + 0.5 * (Q.cwiseProduct(evals[k].hess)).sum();
      for (Eigen::Index m = 0; m < n; ++m) E(m, k) += w * evals[m].value * Lk;
    }
    int pos = 0;
    while (pos < d && ++idx[static_cast<std::size_t>(pos)] == nodes) {
      idx[static_cast<std::size_t>(pos)] = 0;
      ++pos;
    }
    if (pos == d) break;
  }
  return E;
}

}  // namespace

TEST(HermiteBasis, OrderingIsDegreeMajorDescendingLex) {
  const HermiteBasis basis(2, 2, 1.0);
  ASSERT_EQ(basis.size(), 6);
  const std::vector<MultiIndex> expected{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  EXPECT_EQ(basis.indices(), expected);
  EXPECT_EQ(basis.position({1, 1}), 4);
  EXPECT_EQ(basis.position({3, 0}), -1);
  EXPECT_EQ(basis.linear_position(1), 2);
  EXPECT_EQ(multi_index_label({1, 0, 2}), "(1;0;2)");
}

TEST(HermiteBasis, SizeIsBinomial) {
  // C(d + K, K)
  EXPECT_EQ(HermiteBasis(4, 4, 1.0).size(), 70);
  EXPECT_EQ(HermiteBasis(3, 3, 2.0).size(), 20);
  EXPECT_EQ(HermiteBasis(1, 5, 1.0).size(), 6);
}

TEST(HermiteBasis, OrthonormalUnderGaussianByQuadrature) {
  const double beta = 2.5;
  const HermiteBasis basis(2, 4, beta);
  const oracle::Quadrature q = oracle::gauss_hermite(12);
  const Eigen::Index n = basis.size();
  Matrix gram = Matrix::Zero(n, n);
  for (std::size_t a = 0; a < q.nodes.size(); ++a) {
    for (std::size_t b = 0; b < q.nodes.size(); ++b) {
      Vector z(2);
      z << q.nodes[a] / std::sqrt(beta), q.nodes[b] / std::sqrt(beta);
      Vector v(n);
      for (Eigen::Index k = 0; k < n; ++k) v(k) = evaluate(basis.index(k), z, beta).value;
      gram += q.weights[a] * q.weights[b] * v * v.transpose();
    }
  }
  EXPECT_LT((gram - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Generator, MatchesPointwiseQuadratureOracle) {
  std::mt19937_64 rng(11);
  const std::vector<LinearGaussianModel> models{
      build_ou(1.7, 0.6), build_magnetic(0.8, 1.3, 2.0),
      build_gle({1.1, 0.7}, {0.9, 2.0}, 1.5),
      build_genou(oracle::random_skew(3, rng), 0.9, 1.2, 0.8)};
  for (const auto& model : models) {
    const int degree = model.state_dim() > 2 ? 2 : 3;
    const BasisPtr basis = build_basis(static_cast<int>(model.state_dim()), degree, model.inv_temp());
    const Matrix E = assemble_generator(model, basis).entries();
    const Matrix ref = quadrature_generator(model, *basis, degree + 3);
    EXPECT_LT((E - ref).cwiseAbs().maxCoeff(), 1e-11) << model.label();
  }
}

TEST(Generator, DegreeOneBlockIsDriftTranspose) {
  std::mt19937_64 rng(5);
  const LinearGaussianModel model = build_genou(oracle::random_skew(3, rng), 1.4, 0.6, 1.0);
  const BasisPtr basis = build_basis(3, 2, 1.0);
  const Matrix E = assemble_generator(model, basis).entries();
  EXPECT_LT((E.block(1, 1, 3, 3) - model.drift().transpose()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Generator, OrnsteinUhlenbeckIsDiagonalInDegree) {
  const double gamma = 2.3;
  const BasisPtr basis = build_basis(1, 6, 0.7);
  const Matrix E = assemble_generator(build_ou(gamma, 0.7), basis).entries();
  Vector expected(7);
  for (int k = 0; k <= 6; ++k) expected(k) = -gamma * k;
  EXPECT_LT((Matrix(E) - Matrix(expected.asDiagonal())).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Generator, PreservesConstantsAndDegree) {
  const BasisPtr basis = build_basis(3, 3, 1.0);
  const Matrix E =
      assemble_generator(build_genou(reference_skew_matrix(), 1.0, 1.0, 1.0), basis).entries();
  for (Eigen::Index m = 0; m < basis->size(); ++m) {
    for (Eigen::Index k = 0; k < basis->size(); ++k) {
      if (HermiteBasis::total_degree(basis->index(m)) != HermiteBasis::total_degree(basis->index(k))) {
        EXPECT_NEAR(E(m, k), 0.0, 1e-14);
      }
    }
  }
  EXPECT_LT(E.row(0).norm(), 1e-14);
  EXPECT_LT(E.col(0).norm(), 1e-14);
}

TEST(Generator, SplitRecombinesAndFactorsScale) {
  const LinearGaussianModel model = build_magnetic(1.5, 0.4, 2.0);
  const BasisPtr basis = build_basis(3, 2, 2.0);
  const OperatorMatrix L = assemble_generator(model, basis);
  const auto [S, A] = split_sym_antisym(L);
  EXPECT_EQ(S.tag(), SymmetryTag::symmetric);
  EXPECT_EQ(A.tag(), SymmetryTag::antisymmetric);
  EXPECT_LT((S.entries() + A.entries() - L.entries()).norm(), 1e-14);
  const GeneratorSplit split = decompose_generator(model, basis);
  EXPECT_DOUBLE_EQ(split.scale, 0.4);
  EXPECT_LT((split.symmetric_unit.entries() * split.scale - S.entries()).norm(), 1e-13);
  // The unit-normalized symmetric part does not depend on the friction.
  const GeneratorSplit other = decompose_generator(with_friction(model, 3.0), basis);
  EXPECT_LT((other.symmetric_unit.entries() - split.symmetric_unit.entries()).norm(), 1e-13);
}

TEST(Generator, RejectsWrongDimensionOrTemperature) {
  const LinearGaussianModel model = build_ou(1.0, 1.0);
  EXPECT_THROW(assemble_generator(model, build_basis(2, 2, 1.0)), DimensionError);
  EXPECT_THROW(assemble_generator(model, build_basis(1, 2, 2.0)), Error);
}

TEST(Generator, HInnerRejectsConstantComponent) {
  const BasisPtr basis = build_basis(1, 2, 1.0);
  const auto [S, A] = split_sym_antisym(assemble_generator(build_ou(1.0, 1.0), basis));
  Vector f = Vector::Zero(3);
  f(1) = 1.0;
  EXPECT_DOUBLE_EQ(h_inner(f, f, S), 1.0);
  f(0) = 1.0;
  EXPECT_THROW(h_inner(f, f, S), DomainError);
}

TEST(OperatorMatrix, TagIsEnforced) {
  const BasisPtr basis = build_basis(1, 1, 1.0);
  Matrix M(2, 2);
  M << 0, 1, 0, 0;
  EXPECT_THROW(OperatorMatrix(basis, M, SymmetryTag::symmetric), Error);
  EXPECT_THROW(OperatorMatrix(basis, M, SymmetryTag::antisymmetric), Error);
  EXPECT_NO_THROW(OperatorMatrix(basis, M, SymmetryTag::general));
  EXPECT_THROW(OperatorMatrix(basis, Matrix::Zero(3, 3), SymmetryTag::general), DimensionError);
}

TEST(OperatorMatrix, CsvHasLabelledHeader) {
  const BasisPtr basis = build_basis(3, 1, 1.0);
  const std::string csv = operator_to_csv(assemble_generator(build_magnetic(1, 1, 1), basis));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "row,(0;0;0),(1;0;0),(0;1;0),(0;0;1)");
}
