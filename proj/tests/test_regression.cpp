#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "cis/regression.hpp"

namespace {

Eigen::MatrixXd random_matrix(int n, int q, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> norm;
  Eigen::MatrixXd X(n, q);
  for (int j = 0; j < q; ++j) {
    for (int i = 0; i < n; ++i) X(i, j) = norm(gen);
  }
  return X;
}

Eigen::VectorXd random_vector(int n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> norm;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = norm(gen);
  return v;
}

double soft(double z, double t) { return z > t ? z - t : (z < -t ? z + t : 0.0); }

}  // namespace

TEST_CASE("ols recovers exact coefficients") {
  Eigen::MatrixXd X = random_matrix(30, 4, 1);
  Eigen::VectorXd beta(4);
  beta << 2.0, -1.0, 0.0, 0.5;
  Eigen::VectorXd y = X * beta;
  auto fit = cis::ols_fit(y, X);
  CHECK_FALSE(fit.min_norm_fallback);
  for (int j = 0; j < 4; ++j) CHECK_THAT(fit.coef[j], Catch::Matchers::WithinAbs(beta[j], 1e-10));
  CHECK(fit.residuals.norm() < 1e-9);
}

TEST_CASE("ols flags rank deficiency and keeps the minimum-norm solution") {
  Eigen::MatrixXd X = random_matrix(20, 3, 2);
  X.col(2) = X.col(1);
  Eigen::VectorXd y = X.col(0) + 2.0 * X.col(1);
  auto fit = cis::ols_fit(y, X);
  CHECK(fit.min_norm_fallback);
  CHECK(fit.residuals.norm() < 1e-9);
  // minimum-norm splits the duplicated coefficient evenly
  CHECK_THAT(fit.coef[1], Catch::Matchers::WithinAbs(1.0, 1e-8));
  CHECK_THAT(fit.coef[2], Catch::Matchers::WithinAbs(1.0, 1e-8));
  CHECK_THROWS_AS(cis::ols_fit(y, random_matrix(20, 20, 3)), cis::error);
}

TEST_CASE("single-coordinate lasso matches the soft threshold formula") {
  const int n = 50;
  Eigen::MatrixXd X = random_matrix(n, 1, 4);
  Eigen::VectorXd y = 1.5 * X.col(0) + 0.2 * random_vector(n, 5);
  const double w = 0.7;
  Eigen::VectorXd weights(1);
  weights << w;
  for (double lambda : {0.01, 0.2, 5.0}) {
    auto fit = cis::lasso_cd(y, X, lambda, weights);
    REQUIRE(fit.converged);
    const double d = X.col(0).squaredNorm() / n;
    const double expect = soft(X.col(0).dot(y) / n, lambda * w) / d;
    CHECK_THAT(fit.coefficients[0], Catch::Matchers::WithinAbs(expect, 1e-10));
  }
}

TEST_CASE("lasso at lambda zero meets ols") {
  Eigen::MatrixXd X = random_matrix(60, 5, 6);
  Eigen::VectorXd y = X * random_vector(5, 7) + 0.1 * random_vector(60, 8);
  auto ols = cis::ols_fit(y, X);
  auto fit = cis::lasso_cd(y, X, 0.0, Eigen::VectorXd::Ones(5));
  REQUIRE(fit.converged);
  for (int j = 0; j < 5; ++j) {
    CHECK_THAT(fit.coefficients[j], Catch::Matchers::WithinAbs(ols.coef[j], 1e-6));
  }
}

TEST_CASE("lambda at the entry point zeros every coefficient") {
  Eigen::MatrixXd X = random_matrix(40, 6, 9);
  Eigen::VectorXd y = random_vector(40, 10);
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(6);
  double lambda_max = 0.0;
  for (int j = 0; j < 6; ++j) lambda_max = std::max(lambda_max, std::abs(X.col(j).dot(y)) / 40.0);
  auto fit = cis::lasso_cd(y, X, lambda_max * 1.000001, w);
  CHECK(fit.coefficients.isZero(0.0));
  CHECK(fit.iterations == 1);
  auto below = cis::lasso_cd(y, X, lambda_max * 0.99, w);
  CHECK_FALSE(below.coefficients.isZero(0.0));
}

TEST_CASE("objective never increases along the sweeps") {
  Eigen::MatrixXd X = random_matrix(50, 20, 11);
  Eigen::VectorXd y = X.leftCols(3) * random_vector(3, 12) + random_vector(50, 13);
  std::vector<double> trace;
  auto fit = cis::lasso_cd(y, X, 0.05, Eigen::VectorXd::Ones(20), nullptr, &trace);
  REQUIRE(fit.converged);
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 1; i < trace.size(); ++i) {
    CHECK(trace[i] <= trace[i - 1] + 1e-12 * std::abs(trace[i - 1]));
  }
  CHECK_THAT(fit.objective, Catch::Matchers::WithinAbs(trace.back(), 1e-12));
}

TEST_CASE("lasso solutions satisfy the stationarity conditions") {
  Eigen::MatrixXd X = random_matrix(80, 12, 14);
  Eigen::VectorXd y = X.leftCols(4) * random_vector(4, 15) + 0.5 * random_vector(80, 16);
  Eigen::VectorXd w(12);
  for (int j = 0; j < 12; ++j) w[j] = 0.5 + 0.1 * j;
  const double lambda = 0.08;
  auto fit = cis::lasso_cd(y, X, lambda, w);
  REQUIRE(fit.converged);
  Eigen::VectorXd r = y - X * fit.coefficients;
  for (int j = 0; j < 12; ++j) {
    const double g = X.col(j).dot(r) / 80.0;
    if (fit.coefficients[j] != 0.0) {
      CHECK_THAT(g, Catch::Matchers::WithinAbs(lambda * w[j] * (fit.coefficients[j] > 0 ? 1 : -1),
                                               1e-6));
    } else {
      CHECK(std::abs(g) <= lambda * w[j] + 1e-6);
    }
  }
}

TEST_CASE("warm starts land on the same solution") {
  Eigen::MatrixXd X = random_matrix(70, 10, 17);
  Eigen::VectorXd y = X.leftCols(2) * random_vector(2, 18) + 0.3 * random_vector(70, 19);
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(10);
  auto cold = cis::lasso_cd(y, X, 0.1, w);
  Eigen::VectorXd start = random_vector(10, 20);
  auto warm = cis::lasso_cd(y, X, 0.1, w, &start);
  REQUIRE(warm.converged);
  for (int j = 0; j < 10; ++j) {
    CHECK_THAT(warm.coefficients[j], Catch::Matchers::WithinAbs(cold.coefficients[j], 1e-6));
  }
}

TEST_CASE("gram path agrees with residual-mode descent over the same grid") {
  const int n = 60, q = 15;
  Eigen::MatrixXd X = random_matrix(n, q, 21);
  Eigen::VectorXd y = X.leftCols(3) * random_vector(3, 22) + 0.4 * random_vector(n, 23);
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(q);
  auto path = cis::detail::bic_path(y, X, w);

  double lambda_max = 0.0;
  for (int j = 0; j < q; ++j) lambda_max = std::max(lambda_max, std::abs(X.col(j).dot(y)) / n);
  const double log_max = std::log(lambda_max);
  const double log_min = std::log(lambda_max * 1e-4);
  Eigen::VectorXd warm = Eigen::VectorXd::Zero(q);
  double best_bic = 0.0;
  bool have = false;
  Eigen::VectorXd best;
  double best_lambda = 0.0;
  for (int g = 0; g < 50; ++g) {
    const double lam = std::exp(log_max + (log_min - log_max) * (g / 49.0));
    auto fit = cis::lasso_cd(y, X, lam, w, &warm);
    warm = fit.coefficients;
    const double rss = (y - X * fit.coefficients).squaredNorm();
    const int df = (int)(fit.coefficients.array() != 0.0).count();
    const double bic = n * std::log(std::max(rss, 1e-280) / n) + df * std::log((double)n);
    if (!have || bic < best_bic) {
      best_bic = bic;
      best = fit.coefficients;
      best_lambda = lam;
      have = true;
    }
  }
  CHECK_THAT(path.lambda, Catch::Matchers::WithinRel(best_lambda, 1e-12));
  for (int j = 0; j < q; ++j) {
    CHECK_THAT(path.coefficients[j], Catch::Matchers::WithinAbs(best[j], 1e-5));
  }
}

TEST_CASE("adaptive lasso keeps strong signals and drops the rest") {
  const int n = 120, q = 8;
  Eigen::MatrixXd X = random_matrix(n, q, 24);
  Eigen::VectorXd y = 3.0 * X.col(0) - 2.0 * X.col(5) + 0.3 * random_vector(n, 25);
  auto res = cis::adaptive_lasso(y, X);
  CHECK(res.selected == cis::ActiveSet{0, 5});
  CHECK(res.fit.converged);
  CHECK((y - X * res.fit.coefficients - res.residuals).norm() < 1e-12);
}

TEST_CASE("adaptive lasso handles edge inputs") {
  Eigen::VectorXd y(4);
  y << 1, 1, -1, -1;

  // no columns at all
  auto empty = cis::adaptive_lasso(y, Eigen::MatrixXd(4, 0));
  CHECK(empty.selected.empty());
  CHECK(empty.residuals == y);

  // response exactly orthogonal to the lone column
  Eigen::MatrixXd X(4, 1);
  X.col(0) << 1, -1, 1, -1;
  auto orth = cis::adaptive_lasso(y, X);
  CHECK(orth.selected.empty());
  CHECK(orth.fit.converged);
  CHECK(orth.residuals == y);

  CHECK_THROWS_AS(cis::adaptive_lasso(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Zero(1, 1)),
                  cis::error);
}

TEST_CASE("adaptive lasso stays empty on pure noise often enough") {
  // with no signal at all, BIC should usually pick the empty model
  const int n = 50, q = 10;
  int empties = 0;
  for (unsigned seed = 0; seed < 100; ++seed) {
    Eigen::MatrixXd X = random_matrix(n, q, 1000 + seed);
    Eigen::VectorXd y = random_vector(n, 5000 + seed);
    if (cis::adaptive_lasso(y, X).selected.empty()) ++empties;
  }
  CHECK(empties >= 35);
}

TEST_CASE("lasso_cd validates its inputs") {
  Eigen::MatrixXd X = random_matrix(10, 2, 26);
  Eigen::VectorXd y = random_vector(10, 27);
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(cis::lasso_cd(y, X, -0.1, w), cis::error);
  CHECK_THROWS_AS(cis::lasso_cd(y, X, 0.1, Eigen::VectorXd::Ones(3)), cis::error);
  CHECK_THROWS_AS(cis::lasso_cd(y, X, 0.1, -w), cis::error);
  CHECK_THROWS_AS(cis::lasso_cd(random_vector(9, 28), X, 0.1, w), cis::error);
  Eigen::VectorXd bad_start = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(cis::lasso_cd(y, X, 0.1, w, &bad_start), cis::error);
}
