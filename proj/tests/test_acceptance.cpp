// Acceptance suite: one test per criterion, each printing a pass/fail line
// with its runtime. Criteria run at their stated tolerances; nothing is
// loosened here.

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "descent/descent.hpp"
#include "test_oracles.hpp"

using namespace descent;
namespace fs = std::filesystem;

namespace {

class Timer {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void report(int id, bool pass, const std::string& label, double ms) {
  std::printf("[CRITERION %2d] %s — %s (%.2f ms)\n", id, pass ? "PASS" : "FAIL", label.c_str(), ms);
  std::fflush(stdout);
}

Objective paper_quadratic() {
  Matrix a(2, 2);
  a << 4, 1, 1, 3;
  Vector b(2);
  b << 1, 2;
  return Objective::quadratic(a, b);
}

const ManifoldKind kE2 = ManifoldKind::euclidean(2);
const ManifoldKind kS2 = ManifoldKind::sphere(3);
const ManifoldKind kE1 = ManifoldKind::euclidean(1);

ManifoldPoint e2(double x, double y) {
  Vector v(2);
  v << x, y;
  return {kE2, std::move(v)};
}

ManifoldPoint pole_perturbed(double theta) {
  Vector v(3);
  v << std::sin(theta), 0.0, std::cos(theta);
  return {kS2, std::move(v)};
}

RunConfig make_config(Objective f, ManifoldKind m, ManifoldPoint x0, ScheduleSpec schedule,
                      StepRule rule, std::int64_t iters) {
  return RunConfig{std::move(f), m, std::move(x0), std::move(schedule), rule, {}, {},
                   0,            iters, 0.0,       {}};
}

Trace sphere_example_run(std::int64_t iters) {
  return run_rgd(make_config(Objective::sphere_height(), kS2, pole_perturbed(1e-3),
                             {AlphaRule::fixed(1.0), BetaRule::zero()}, StepRule::ExpMap, iters));
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Acceptance, C01_Table1NormalRowOne) {
  Timer timer;
  const ManifoldPoint x1 = rgd_step(paper_quadratic(), e2(0, 0), 0.25, StepRule::Ambient);
  const bool pass = std::abs(x1.coords[0] - 0.25) <= 1e-12 && std::abs(x1.coords[1] - 0.50) <= 1e-12;
  report(1, pass, "fixed step 0.25 from the origin gives (0.25, 0.50)", timer.ms());
  EXPECT_TRUE(pass);
}

TEST(Acceptance, C02_Table1AdaptiveRowOne) {
  Timer timer;
  const ManifoldPoint x1 = momentum_step(paper_quadratic(), e2(0, 0), e2(0, 0), 0.38, 0.0);
  const bool pass = std::abs(x1.coords[0] - 0.38) <= 1e-12 && std::abs(x1.coords[1] - 0.76) <= 1e-12;
  report(2, pass, "injected step 0.38 with vanishing momentum gives (0.38, 0.76)", timer.ms());
  EXPECT_TRUE(pass);
}

TEST(Acceptance, C03_Table2RowOne) {
  Timer timer;
  auto cfg = make_config(Objective::half_square(1), kE1,
                         ManifoldPoint(kE1, Vector::Constant(1, 10.0)),
                         {AlphaRule::power_law(1.0, 0.8), BetaRule::zero()}, StepRule::Ambient, 2);
  cfg.noise = NoiseSpec::uniform(1.0, 4.0, 1);
  cfg.noise_override = std::vector<double>{0.5, -0.2};
  const Trace tr = run_sgd(cfg);
  const bool row1 = tr.records[1].x[0] == -0.5 && tr.records[1].f_value == 0.125;
  const double alpha2 = tr.records[2].alpha;
  const bool alpha_ok = std::abs(alpha2 - 0.574) <= 5e-4 &&
                        std::abs(alpha2 - std::pow(2.0, -0.8)) <= 1e-15;
  const bool pass = row1 && alpha_ok;
  report(3, pass, "x1 = -0.5 with f = 0.125 exactly; alpha_2 = 2^-0.8 = 0.574 +- 5e-4", timer.ms());
  EXPECT_TRUE(row1);
  EXPECT_TRUE(alpha_ok);
}

TEST(Acceptance, C04_SphereHeightEnvelopeEveryIteration) {
  Timer timer;
  const Trace tr = sphere_example_run(10000);
  std::int64_t worst_k = -1;
  double worst_excess = 0.0;
  for (const auto& rec : tr.records) {
    if (rec.k < 1) continue;
    const double bound = M_PI * M_PI / (2.0 * static_cast<double>(rec.k));
    const double excess = *rec.gap - bound;
    if (excess > 1e-9 && excess > worst_excess) {
      worst_excess = excess;
      worst_k = rec.k;
    }
  }
  const bool pass = worst_k < 0;
  report(4, pass, "gap f(x_k)+1 <= pi^2/(2k) for every k >= 1 from the theta=1e-3 start",
         timer.ms());
  EXPECT_TRUE(pass) << "envelope violated, worst at k=" << worst_k << " by " << worst_excess
                    << " (the early pole plateau: gap stays near 2 until ~k=11 while the bound "
                       "drops below 2 from k=3)";
}

TEST(Acceptance, C05_PerIterateDescentInequality) {
  Timer timer;
  bool pass = true;
  std::mt19937_64 rng(20240601u);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int inst = 0; inst < 100 && pass; ++inst) {
    const int dim = 2 + inst % 9;
    const auto spd = oracle::random_spd(dim, rng);
    Vector b(dim), x0(dim);
    for (int i = 0; i < dim; ++i) {
      b[i] = normal(rng);
      x0[i] = normal(rng);
    }
    const ManifoldKind m = ManifoldKind::euclidean(dim);
    const double lipschitz = spd.lambda_max;  // known by construction
    const Trace tr = run_rgd(make_config(Objective::quadratic(spd.a, b), m, ManifoldPoint(m, x0),
                                         {AlphaRule::fixed(1.0 / lipschitz), BetaRule::zero()},
                                         StepRule::Ambient, 1000));
    for (std::size_t i = 1; i < tr.records.size(); ++i) {
      const auto& prev = tr.records[i - 1];
      if (tr.records[i].f_value >
          prev.f_value - prev.grad_norm * prev.grad_norm / (2.0 * lipschitz) + 1e-10) {
        pass = false;
        break;
      }
    }
  }
  // Sphere-height run with L = 1, alpha = 1.
  const Trace sphere = sphere_example_run(10000);
  for (std::size_t i = 1; i < sphere.records.size() && pass; ++i) {
    const auto& prev = sphere.records[i - 1];
    if (sphere.records[i].f_value >
        prev.f_value - prev.grad_norm * prev.grad_norm / 2.0 + 1e-10)
      pass = false;
  }
  report(5, pass, "f(x_{k+1}) <= f(x_k) - (1/2L)||grad||^2 + 1e-10 at alpha = 1/L", timer.ms());
  EXPECT_TRUE(pass);
}

TEST(Acceptance, C06_AdaptiveMomentumReachesMinimizer) {
  Timer timer;
  const Objective f = paper_quadratic();
  const Vector x_star = oracle::solve_linear(f.a(), f.b());
  const Trace tr = run_momentum(make_config(f, kE2, e2(0, 0),
                                            {AlphaRule::exact_line_search(), BetaRule::step_ratio()},
                                            StepRule::Ambient, 200));
  std::int64_t hit = -1;
  for (const auto& rec : tr.records)
    if ((rec.x - x_star).norm() <= 1e-6) {
      hit = rec.k;
      break;
    }
  const bool pass = hit >= 0;
  report(6, pass,
         "line search + step-ratio momentum reaches ||x - x*|| <= 1e-6 within 200 iterations" +
             (pass ? " (k=" + std::to_string(hit) + ")" : std::string()),
         timer.ms());
  EXPECT_TRUE(pass);
}

TEST(Acceptance, C07_MomentumScheduleRateInstrumentation) {
  Timer timer;
  const Objective f = paper_quadratic();
  const double lipschitz = (7.0 + std::sqrt(5.0)) / 2.0;
  const Trace tr = run_momentum(make_config(
      f, kE2, e2(0, 0),
      {AlphaRule::power_law(1.0 / lipschitz, 1.0), BetaRule::power_law(0.5, 1.0)},
      StepRule::Ambient, 100000));

  const ManifoldPoint x_star = *f.known_minimizer(kE2);
  const double f_star = eval(f, x_star);
  bool energy_monotone = true;
  double prev_energy = 0.0;
  std::vector<std::pair<std::int64_t, double>> gaps;
  for (const auto& rec : tr.records) {
    const double e = energy(rec, x_star.coords, f_star);
    if (rec.k > 20 && e > prev_energy + 1e-15) energy_monotone = false;
    prev_energy = e;
    if (rec.k >= 1) gaps.emplace_back(rec.k, *rec.gap);
  }

  const RateFit fit = fit_rate(gaps, 100, 100000);
  const double p_envelope = std::min(2.0, fit.exponent);
  const BoundReport bound = check_bound(gaps, p_envelope, 100, 0.05);
  const bool pass = energy_monotone && bound.satisfied;
  std::ostringstream label;
  label << "alpha=c/k, beta=d/k: fitted gap exponent p=" << fit.exponent
        << " (r^2=" << fit.r_squared << "); E_k nonincreasing after k=20: "
        << (energy_monotone ? "yes" : "NO") << "; envelope C/k^" << p_envelope
        << " worst ratio " << bound.worst_ratio;
  report(7, pass, label.str(), timer.ms());
  EXPECT_TRUE(energy_monotone);
  EXPECT_TRUE(bound.satisfied);
}

TEST(Acceptance, C08_StochasticRateEnvelopes) {
  Timer timer;
  bool pass = true;
  std::ostringstream label;
  label << "mean gap over 1000 seeds vs anchor-calibrated k^{-(gamma-0.5)}:";
  for (const double gamma : {0.8, 0.6, 1.0}) {
    MeanAccumulator acc;
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
      auto cfg = make_config(Objective::half_square(1), kE1,
                             ManifoldPoint(kE1, Vector::Constant(1, 10.0)),
                             {AlphaRule::power_law(1.0, gamma), BetaRule::zero()},
                             StepRule::Ambient, 10000);
      cfg.noise = NoiseSpec::uniform(1.0, 4.0, 1);
      cfg.seed = seed;
      acc.add(run_sgd(cfg));
    }
    const Trace mean = acc.mean();
    std::vector<std::pair<std::int64_t, double>> gaps;
    for (const auto& rec : mean.records)
      if (rec.k >= 1) gaps.emplace_back(rec.k, *rec.gap);
    const double p = gamma - 0.5;
    const BoundReport bound = check_bound(gaps, p, 10, 0.05);
    const RateFit fit = fit_rate(gaps, 100, 10000);
    const bool envelope_ok = bound.satisfied;
    const bool fit_ok = fit.exponent >= p - 0.05;
    pass = pass && envelope_ok && fit_ok;
    label << " [gamma=" << gamma << ": worst ratio " << bound.worst_ratio << ", fitted p "
          << fit.exponent << (envelope_ok && fit_ok ? "]" : " FAIL]");
  }
  report(8, pass, label.str(), timer.ms());
  EXPECT_TRUE(pass);
}

TEST(Acceptance, C09_GradientOracleSuite) {
  Timer timer;
  std::mt19937_64 rng(777u);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  const Objective objectives[] = {paper_quadratic(), Objective::half_square(3),
                                  Objective::sphere_height(3)};
  for (const Objective& f : objectives) {
    const bool on_sphere = f.kind() == ObjectiveKind::SphereHeight;
    const ManifoldKind m =
        on_sphere ? ManifoldKind::sphere(f.dim()) : ManifoldKind::euclidean(f.dim());
    for (int trial = 0; trial < 1000; ++trial) {
      Vector coords(f.dim());
      for (int i = 0; i < f.dim(); ++i) coords[i] = normal(rng);
      if (on_sphere) coords /= coords.norm();
      const ManifoldPoint x(m, coords);
      const Vector g = euclidean_gradient(f, x);
      const Vector g_fd = finite_difference_gradient(f, x);
      worst = std::max(worst, (g - g_fd).norm() / std::max(1.0, g.norm()));
    }
  }
  const bool pass = worst <= 1e-5;
  std::ostringstream label;
  label << "analytic vs central differences, 1000 points per objective, worst rel err " << worst;
  report(9, pass, label.str(), timer.ms());
  EXPECT_TRUE(pass);
}

TEST(Acceptance, C10_ManifoldPropertySuite) {
  Timer timer;
  std::mt19937_64 rng(555u);
  bool unit_norm_ok = true, idempotent_ok = true, distance_ok = true, third_order_ok = true;
  std::uniform_real_distribution<double> half_pi(0.0, M_PI / 2);
  std::uniform_real_distribution<double> wide(1e-6, M_PI - 1e-6);
  std::uniform_real_distribution<double> small(1e-3, 0.1);
  const int dims[] = {2, 3, 5, 10};
  for (int trial = 0; trial < 10000; ++trial) {
    const int dim = dims[trial % 4];
    const ManifoldKind sphere = ManifoldKind::sphere(dim);
    const ManifoldPoint p(sphere, oracle::random_sphere_point(dim, rng));
    TangentVector t = project_to_tangent(p, oracle::random_sphere_point(dim, rng));

    // Projection idempotence and tangency on the raw projection.
    const TangentVector again = project_to_tangent(p, t.coords);
    if ((again.coords - t.coords).norm() > 1e-14) idempotent_ok = false;
    if (std::abs(t.coords.dot(p.coords)) > 1e-10 * std::max(1.0, t.coords.norm()))
      idempotent_ok = false;

    if (t.coords.norm() < 1e-3) continue;
    const TangentVector unit = scaled(t, 1.0 / t.coords.norm());

    // Unit norm after exp and retraction, ||t|| <= pi/2.
    const TangentVector step = scaled(unit, half_pi(rng));
    if (std::abs(exp_map(p, step).coords.norm() - 1.0) > 1e-12) unit_norm_ok = false;
    if (std::abs(retract_normalize(p, step).coords.norm() - 1.0) > 1e-12) unit_norm_ok = false;

    // Geodesic distance identity up to ||t|| = pi - 1e-6.
    const double len = wide(rng);
    if (std::abs(geodesic_distance(p, exp_map(p, scaled(unit, len))) - len) > 1e-9)
      distance_ok = false;

    // Third-order retraction agreement for ||t|| <= 0.1.
    const double h = small(rng);
    const TangentVector tiny = scaled(unit, h);
    const double diff = (retract_normalize(p, tiny).coords - exp_map(p, tiny).coords).norm();
    if (diff > h * h * h) third_order_ok = false;
  }
  const bool pass = unit_norm_ok && idempotent_ok && distance_ok && third_order_ok;
  std::ostringstream label;
  label << "10^4 cases over S^1..S^9: unit norm " << (unit_norm_ok ? "ok" : "FAIL")
        << ", idempotence " << (idempotent_ok ? "ok" : "FAIL") << ", distance identity "
        << (distance_ok ? "ok" : "FAIL") << ", third-order retraction " << (third_order_ok ? "ok" : "FAIL");
  report(10, pass, label.str(), timer.ms());
  EXPECT_TRUE(pass);
}

TEST(Acceptance, C11_NoiseMomentSuite) {
  Timer timer;
  const NoiseSpec uniform = NoiseSpec::uniform(1.0, 4.0, 1);
  const auto m2 = empirical_moment(uniform, 2.0, 1000000, 8121);
  const auto m4 = empirical_moment(uniform, 4.0, 1000000, 8121);
  const bool uniform_ok =
      std::abs(m2.value - 1.0 / 3.0) <= 0.01 && std::abs(m4.value - 1.0 / 5.0) <= 0.01;

  const NoiseSpec student = NoiseSpec::student_t(5.0, 1.0, 4.0, 1);
  const auto s4_small = empirical_moment(student, 4.0, 100000, 40);
  const auto s4_large = empirical_moment(student, 4.0, 1000000, 40);
  const bool student_ok = !s4_large.diverges && std::isfinite(s4_large.value) &&
                          std::abs(s4_large.value - s4_small.value) / s4_large.value < 0.2;
  const bool flag_ok = empirical_moment(student, 6.0, 100000, 40).diverges;

  const bool pass = uniform_ok && student_ok && flag_ok;
  std::ostringstream label;
  label << "uniform m2=" << m2.value << " m4=" << m4.value << "; student-t(5) m4 stable ("
        << s4_small.value << " -> " << s4_large.value << "), order-6 flagged "
        << (flag_ok ? "yes" : "NO");
  report(11, pass, label.str(), timer.ms());
  EXPECT_TRUE(pass);
}

TEST(Acceptance, C12_ByteIdenticalReruns) {
  Timer timer;
  const fs::path dir =
      fs::temp_directory_path() / ("descent_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cfg = std::string(DESCENT_CONFIG_DIR) + "/quadratic_table1.cfg";
  const std::string base = std::string(DESCENT_CLI_PATH) + " run --config " + cfg + " --out ";
  const int rc1 = std::system((base + (dir / "a").string() + " > /dev/null 2>&1").c_str());
  const int rc2 = std::system((base + (dir / "b").string() + " > /dev/null 2>&1").c_str());
  const std::string csv1 = slurp(dir / "a" / "quadratic_table1_seed1.csv");
  const std::string csv2 = slurp(dir / "b" / "quadratic_table1_seed1.csv");
  const bool pass = rc1 == 0 && rc2 == 0 && !csv1.empty() && csv1 == csv2;
  fs::remove_all(dir);
  report(12, pass, "repeated `run` with the same config and seed is byte-identical", timer.ms());
  EXPECT_TRUE(pass);
}
