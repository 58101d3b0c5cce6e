#include "qpots/benchmarks.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qpots {

namespace {

constexpr double kPi = std::numbers::pi;

void check_unit(const Eigen::Ref<const VectorXd>& x, const char* who) {
  if (!x.allFinite() || (x.array() < 0.0).any() || (x.array() > 1.0).any()) {
    throw std::invalid_argument(std::string(who) + ": input outside [0,1]^d");
  }
}

void check_dtlz(const Eigen::Ref<const VectorXd>& x, Index K, const char* who) {
  check_unit(x, who);
  if (K < 2 || x.size() < K) throw std::invalid_argument(std::string(who) + ": need 2 <= K <= d");
}

}  // namespace

VectorXd zdt3(const Eigen::Ref<const VectorXd>& x) {
  check_unit(x, "zdt3");
  const Index d = x.size();
  if (d < 2) throw std::invalid_argument("zdt3: need d >= 2");
  const double f1 = x[0];
  const double g = 1.0 + 9.0 * x.tail(d - 1).sum() / static_cast<double>(d - 1);
  const double h = 1.0 - std::sqrt(f1 / g) - (f1 / g) * std::sin(10.0 * kPi * f1);
  return VectorXd{{f1, g * h}};
}

VectorXd dtlz3(const Eigen::Ref<const VectorXd>& x, Index K) {
  check_dtlz(x, K, "dtlz3");
  const Index k = x.size() - K + 1;
  const auto xm = x.tail(k).array() - 0.5;
  const double g = 100.0 * (static_cast<double>(k) + (xm.square() - (20.0 * kPi * xm).cos()).sum());
  VectorXd f = VectorXd::Constant(K, 1.0 + g);
  for (Index m = 0; m < K; ++m) {
    for (Index j = 0; j < K - 1 - m; ++j) f[m] *= std::cos(0.5 * kPi * x[j]);
    if (m > 0) f[m] *= std::sin(0.5 * kPi * x[K - 1 - m]);
  }
  return f;
}

VectorXd dtlz7(const Eigen::Ref<const VectorXd>& x, Index K) {
  check_dtlz(x, K, "dtlz7");
  const Index k = x.size() - K + 1;
  const double g = 1.0 + 9.0 * x.tail(k).sum() / static_cast<double>(k);
  VectorXd f(K);
  double h = static_cast<double>(K);
  for (Index m = 0; m < K - 1; ++m) {
    f[m] = x[m];
    h -= f[m] / (1.0 + g) * (1.0 + std::sin(3.0 * kPi * f[m]));
  }
  f[K - 1] = (1.0 + g) * h;
  return f;
}

VectorXd branin_currin(const Eigen::Ref<const VectorXd>& x) {
  check_unit(x, "branin_currin");
  if (x.size() != 2) throw std::invalid_argument("branin_currin: need d = 2");
  const double u = 15.0 * x[0] - 5.0;
  const double v = 15.0 * x[1];
  const double t = v - 5.1 / (4.0 * kPi * kPi) * u * u + 5.0 / kPi * u - 6.0;
  const double branin = t * t + 10.0 * (1.0 - 1.0 / (8.0 * kPi)) * std::cos(u) + 10.0;

  const double a = x[0];
  const double factor = x[1] > 0.0 ? 1.0 - std::exp(-1.0 / (2.0 * x[1])) : 1.0;
  const double num = 2300.0 * a * a * a + 1900.0 * a * a + 2092.0 * a + 60.0;
  const double den = 100.0 * a * a * a + 500.0 * a * a + 4.0 * a + 20.0;
  return VectorXd{{branin, factor * num / den}};
}

Benchmark make_benchmark(const std::string& name, Index K) {
  Benchmark b;
  b.name = name;
  if (name == "branin-currin") {
    b.d = 2;
    b.K = 2;
    b.eval = [](const Eigen::Ref<const VectorXd>& x) { return branin_currin(x); };
    b.ref_point = VectorXd{{18.0, 6.0}};
  } else if (name == "zdt3-d5" || name == "zdt3-d10") {
    b.d = name == "zdt3-d5" ? 5 : 10;
    b.K = 2;
    b.eval = [](const Eigen::Ref<const VectorXd>& x) { return zdt3(x); };
    b.ref_point = VectorXd{{11.0, 11.0}};
  } else if (name == "dtlz3-d5" || name == "dtlz3-d10" || name == "dtlz7-d5" || name == "dtlz7-d10") {
    b.d = name.ends_with("d5") ? 5 : 10;
    b.K = K > 0 ? K : 2;
    if (b.K < 2 || b.K > b.d) throw ConfigError("benchmark " + name + ": K must lie in [2, d]");
    const Index Kb = b.K;
    if (name.starts_with("dtlz3")) {
      b.eval = [Kb](const Eigen::Ref<const VectorXd>& x) { return dtlz3(x, Kb); };
      // 10% above the largest attainable objective value.
      const double k = static_cast<double>(b.d - b.K + 1);
      b.ref_point = VectorXd::Constant(b.K, 1.1 * (1.0 + 225.0 * k));
    } else {
      b.eval = [Kb](const Eigen::Ref<const VectorXd>& x) { return dtlz7(x, Kb); };
      b.ref_point = VectorXd::Constant(b.K, 15.0);
    }
  } else {
    throw ConfigError("unknown benchmark '" + name + "'");
  }
  b.space = DesignSpace::unit_cube(b.d);
  return b;
}

std::vector<std::string> benchmark_names() {
  return {"branin-currin", "zdt3-d5", "zdt3-d10", "dtlz3-d5", "dtlz3-d10", "dtlz7-d5", "dtlz7-d10"};
}

VectorXd observe(const Benchmark& bench, const Eigen::Ref<const VectorXd>& x, double noise_var, Rng& rng) {
  if (!(noise_var >= 0.0)) throw std::invalid_argument("observe: negative noise variance");
  VectorXd y = bench.eval(x);
  if (noise_var > 0.0) {
    const double s = std::sqrt(noise_var);
    for (Index k = 0; k < y.size(); ++k) y[k] += s * rng.normal();
  }
  return y;
}

const std::vector<std::pair<double, double>>& zdt3_front_segments() {
  static const std::vector<std::pair<double, double>> segs = {
      {0.0, 0.0830015349},
      {0.1822287280, 0.2577623634},
      {0.4093136748, 0.4538821041},
      {0.6183967944, 0.6525117038},
      {0.8233317983, 0.8518328654},
  };
  return segs;
}

MatrixXd zdt3_true_front(Index n) {
  if (n < 2) throw std::invalid_argument("zdt3_true_front: need n >= 2");
  const auto& segs = zdt3_front_segments();
  double total = 0.0;
  for (const auto& [a, b] : segs) total += b - a;
  MatrixXd F(n, 2);
  for (Index i = 0; i < n; ++i) {
    double s = total * static_cast<double>(i) / static_cast<double>(n - 1);
    double f1 = segs.back().second;
    for (const auto& [a, b] : segs) {
      if (s <= b - a) {
        f1 = a + s;
        break;
      }
      s -= b - a;
    }
    F(i, 0) = f1;
    F(i, 1) = 1.0 - std::sqrt(f1) - f1 * std::sin(10.0 * kPi * f1);
  }
  return F;
}

}  // namespace qpots
