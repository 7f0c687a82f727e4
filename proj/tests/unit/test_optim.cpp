#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "slateglm/glm.hpp"
#include "slateglm/optim.hpp"

using namespace slateglm::optim;
using slateglm::Rng;
using slateglm::linalg::norm;

namespace {

Vector random_vector(std::size_t n, Rng& rng, double scale = 1.0) {
  Vector v(n);
  for (double& e : v) e = rng.normal() * scale;
  return v;
}

double dist(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST(ProjectBall, Examples) {
  const Vector inside{0.3, 0.4};
  EXPECT_EQ(project_ball(inside, 1.0), inside);
  const auto p = project_ball(Vector{3, 4}, 1.0);
  EXPECT_NEAR(p[0], 0.6, 1e-15);
  EXPECT_NEAR(p[1], 0.8, 1e-15);
  Rng rng(1);
  for (int k = 0; k < 100; ++k) {
    const auto v = random_vector(4, rng, 2.0);
    EXPECT_NEAR(norm(project_ball(v, 1.5)), std::min(norm(v), 1.5), 1e-12);
  }
}

TEST(ProjectEllipsoid, InteriorUnchanged) {
  const Ellipsoid e(Vector{1, 1, 1}, SymMatrix::identity(3), 1.0);
  const Vector x{1.2, 0.9, 1.1};
  EXPECT_EQ(project_ellipsoid(x, e, 1e-12), x);
}

TEST(ProjectEllipsoid, SphericalCase) {
  const Vector c{0.5, -1.0, 2.0};
  const auto p = project_ellipsoid(Vector{2.5, -1.0, 2.0}, c, SymMatrix::identity(3), 1.0, 1e-12);
  EXPECT_NEAR(p[0], 1.5, 1e-9);
  EXPECT_NEAR(p[1], -1.0, 1e-12);
  EXPECT_NEAR(p[2], 2.0, 1e-12);
}

TEST(ProjectEllipsoid, MatchesBoundarySampling) {
  Rng rng(2);
  for (int trial = 0; trial < 3; ++trial) {
    const SymMatrix v = oracle::random_spd(3, rng, 0.3);
    const Vector c = random_vector(3, rng, 0.5);
    const double beta = 0.8;
    const Ellipsoid e(c, v, beta);
    Vector x = c;
    for (double& xi : x) xi += rng.uniform(1.5, 3.0) * (rng.bernoulli(0.5) ? 1 : -1);
    const auto p = project_ellipsoid(x, e, 1e-12);
    // Boundary points c + sqrt(beta) V^{-1/2} u for unit u: a global pass,
    // then a local pass around the best direction.
    const auto root = slateglm::linalg::inv_sqrt(v);
    double best = std::numeric_limits<double>::infinity();
    Vector best_point, best_u(3), u(3), b(3);
    auto try_direction = [&](Vector dir) {
      const double n2 = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
      for (double& ui : dir) ui /= n2;
      slateglm::linalg::multiply_into(root, dir, b);
      for (int i = 0; i < 3; ++i) b[i] = c[i] + std::sqrt(beta) * b[i];
      const double d = dist(b, x);
      if (d < best) {
        best = d;
        best_point = b;
        best_u = dir;
      }
    };
    for (int k = 0; k < 1000000; ++k) {
      for (double& ui : u) ui = rng.normal();
      try_direction(u);
    }
    for (double radius : {1e-2, 1e-3, 1e-4}) {
      const Vector centre = best_u;
      for (int k = 0; k < 100000; ++k) {
        for (int i = 0; i < 3; ++i) u[i] = centre[i] + radius * rng.normal();
        try_direction(u);
      }
    }
    EXPECT_LT(dist(p, best_point), 1e-3);
    EXPECT_LE(dist(p, x), best + 1e-9);
    EXPECT_NEAR(e.distance_sq(p), beta, 1e-8);
  }
}

TEST(ProjectAdmissible, BallOnlyEqualsProjectBall) {
  const auto set = AdmissibleSet::ball(1.0, 2);
  EXPECT_EQ(project_admissible(Vector{3, 4}, set, 1e-12, 1000), project_ball(Vector{3, 4}, 1.0));
}

TEST(ProjectAdmissible, InsideUnchanged) {
  const auto set = AdmissibleSet::ball_and_ellipsoid(2.0, Ellipsoid(Vector{0.5, 0}, SymMatrix::identity(2), 1.0));
  const Vector x{0.4, 0.2};
  EXPECT_EQ(project_admissible(x, set, 1e-12, 1000), x);
}

TEST(ProjectAdmissible, MatchesGridMinimizer) {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const double s = rng.uniform(0.8, 1.5);
    const Vector c{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    const SymMatrix v = oracle::random_spd(2, rng, 0.5);
    const double beta = rng.uniform(0.3, 1.0);
    const auto set = AdmissibleSet::ball_and_ellipsoid(s, Ellipsoid(c, v, beta));
    const Vector x{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const auto p = project_admissible(x, set, 1e-12, 100000);
    EXPECT_TRUE(set.contains(p, 1e-8));
    auto feasible = [&](double a, double b) {
      const Vector t{a, b};
      return a * a + b * b <= s * s && oracle::dense_quad(Vector{a - c[0], b - c[1]}, v) <= beta;
    };
    auto f = [&](double a, double b) { return std::hypot(a - x[0], b - x[1]); };
    const auto g = oracle::grid_minimize(f, feasible, 0.0, 0.0, s, 2001);
    EXPECT_NEAR(dist(p, x), g.value, 1e-3);
    EXPECT_LT(std::hypot(p[0] - g.x, p[1] - g.y), 2e-2);
    // The intersection projection is at least as far as each single-set projection.
    EXPECT_GE(dist(p, x) + 1e-9, dist(project_ball(x, s), x));
    EXPECT_GE(dist(p, x) + 1e-9, dist(project_ellipsoid(x, set.ellipsoid(), 1e-12), x));
  }
}

TEST(Objective, GradientMatchesFiniteDifferences) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 5;
    PenalizedObjective obj;
    obj.anchor = random_vector(n, rng, 0.5);
    obj.anchor_metric = oracle::random_spd(n, rng);
    obj.eta_weight = rng.uniform(0.05, 0.5);
    for (auto mode : {LabelMode::kZero, LabelMode::kOne, LabelMode::kBoth}) obj.data_terms.push_back({random_vector(n, rng, 0.5), mode});
    const auto theta = random_vector(n, rng);
    const auto g = objective_gradient(obj, theta);
    const auto fd = oracle::fd_gradient([&](const Vector& t) { return objective_value(obj, t); }, theta, 1e-5);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(g[i], fd[i], 1e-5 * std::max(1.0, std::abs(fd[i])));
  }
}

TEST(SolvePenalized, NoDataReturnsAnchor) {
  PenalizedObjective obj;
  obj.anchor = {0.2, -0.1};
  obj.anchor_metric = SymMatrix::identity(2);
  const auto r = solve_penalized(obj, AdmissibleSet::ball(1.0, 2), 1e-8);
  EXPECT_LT(dist(r.theta, obj.anchor), 1e-12);
}

TEST(SolvePenalized, ZeroItemReturnsProjectedAnchor) {
  PenalizedObjective obj;
  obj.anchor = {3.0, 4.0};
  obj.anchor_metric = SymMatrix::identity(2);
  obj.data_terms.push_back({{0.0, 0.0}, LabelMode::kBoth});
  const auto r = solve_penalized(obj, AdmissibleSet::ball(1.0, 2), 1e-8);
  EXPECT_LT(dist(r.theta, Vector{0.6, 0.8}), 1e-8);
}

TEST(SolvePenalized, MatchesGridExample) {
  PenalizedObjective obj;
  obj.anchor = {0.0, 0.0};
  obj.anchor_metric = SymMatrix::identity(2);
  obj.eta_weight = 0.25;
  obj.data_terms.push_back({{1.0, 0.0}, LabelMode::kOne});
  const auto r = solve_penalized(obj, AdmissibleSet::ball(5.0, 2), 1e-8);
  auto f = [](double a, double b) { return 0.25 * (a * a + b * b) + oracle::xent(a, 1); };
  const auto g = oracle::grid_minimize(f, [](double a, double b) { return a * a + b * b <= 25.0; }, 0, 0, 5.0, 2001);
  EXPECT_NEAR(objective_value(obj, r.theta), g.value, 1e-3);
  EXPECT_LE(objective_value(obj, r.theta), g.value + 1e-12);
}

TEST(SolvePenalized, NeverWorseThanAnchorAndFeasible) {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 4;
    PenalizedObjective obj;
    obj.anchor = random_vector(n, rng, 1.0);
    obj.anchor_metric = oracle::random_spd(n, rng);
    obj.eta_weight = rng.uniform(0.1, 0.5);
    obj.data_terms.push_back({random_vector(n, rng, 0.5), trial % 2 ? LabelMode::kOne : LabelMode::kBoth});
    const auto set = AdmissibleSet::ball_and_ellipsoid(
        1.5, Ellipsoid(random_vector(n, rng, 0.2), oracle::random_spd(n, rng), rng.uniform(0.5, 2.0)));
    const auto r = solve_penalized(obj, set, 1e-6);
    EXPECT_TRUE(set.contains(r.theta, 1e-6));
    const auto start = project_admissible(obj.anchor, set, 1e-12, 100000);
    EXPECT_LE(objective_value(obj, r.theta), objective_value(obj, start) + 1e-9);
    const auto again = solve_penalized(obj, set, 1e-6);
    EXPECT_EQ(again.theta, r.theta);
  }
}

TEST(SolvePenalized, IterationCapRaises) {
  PenalizedObjective obj;
  obj.anchor = {5.0, 5.0};
  obj.anchor_metric = SymMatrix::diagonal(Vector{1.0, 100.0});
  obj.eta_weight = 0.5;
  obj.data_terms.push_back({{1.0, 1.0}, LabelMode::kBoth});
  SolverSettings tight;
  tight.max_iter = 1;
  EXPECT_THROW(solve_penalized(obj, AdmissibleSet::ball(1.0, 2), 1e-12, tight), SolverError);
}

TEST(Mle, EmptyAndZeroHistory) {
  EXPECT_EQ(solve_regularized_mle({}, 3, 1.0, 2.0, 1e-8).theta, Vector(3, 0.0));
  const std::vector<Observation> h{{{0.0, 0.0}, 1}};
  EXPECT_LT(norm(solve_regularized_mle(h, 2, 1.0, 2.0, 1e-8).theta), 1e-12);
}

TEST(Mle, MatchesGridOnFivePoints) {
  Rng rng(6);
  std::vector<Observation> h;
  for (int k = 0; k < 5; ++k) h.push_back({{rng.uniform(-1, 1), rng.uniform(-1, 1)}, rng.bernoulli(0.5) ? 1 : 0});
  const auto r = solve_regularized_mle(h, 2, 1.0, 3.0, 1e-8);
  auto f = [&](double a, double b) {
    double v = a * a + b * b;
    for (const auto& o : h) v += oracle::xent(o.x[0] * a + o.x[1] * b, o.y);
    return v;
  };
  const auto g = oracle::grid_minimize(f, [](double a, double b) { return a * a + b * b <= 9.0; }, 0, 0, 3.0, 2001);
  EXPECT_NEAR(mle_value(h, 1.0, r.theta), g.value, 1e-3);
  const auto fd = oracle::fd_gradient([&](const Vector& t) { return mle_value(h, 1.0, t); }, Vector{0.3, -0.2}, 1e-5);
  const auto an = mle_gradient(h, 1.0, Vector{0.3, -0.2});
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(an[i], fd[i], 1e-7);
}

TEST(AdmissibleSet, MembershipAndDiameter) {
  const auto ball = AdmissibleSet::ball(2.0, 3);
  EXPECT_TRUE(ball.contains(Vector{2.0, 0.0, 0.0}));
  EXPECT_FALSE(ball.contains(Vector{2.001, 0.0, 0.0}));
  EXPECT_DOUBLE_EQ(ball.diameter_bound(), 4.0);
  const auto cut = AdmissibleSet::ball_and_ellipsoid(2.0, Ellipsoid(Vector(3, 0.0), SymMatrix::identity(3, 4.0), 1.0));
  EXPECT_DOUBLE_EQ(cut.diameter_bound(), 1.0);
  EXPECT_FALSE(cut.contains(Vector{0.6, 0.0, 0.0}));
  const auto open = AdmissibleSet::ball(std::numeric_limits<double>::infinity(), 2);
  EXPECT_TRUE(open.contains(Vector{1e6, 1e6}));
}

TEST(Ellipsoid, RejectsIndefiniteMetric) {
  EXPECT_THROW(Ellipsoid(Vector{0, 0}, SymMatrix::diagonal(Vector{1, -1}), 1.0), std::exception);
}
