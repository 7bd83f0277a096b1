#include "mono3d/gradcheck.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "mono3d/errors.hpp"
#include "mono3d/geometry.hpp"
#include "mono3d/losses.hpp"

namespace mono3d {

namespace {

constexpr double kStep = 1e-5;

double rel_error(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-8);
}

std::string fmt_triples(const SizeTriple& s, const SizeTriple& t) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "s=(%.9g, %.9g, %.9g) s*=(%.9g, %.9g, %.9g)", s.h, s.w, s.l,
                t.h, t.w, t.l);
  return buf;
}

struct Worst {
  double error = 0.0;
  std::string where;

  void update(double err, const std::string& where_str) {
    if (err > error) {
      error = err;
      where = where_str;
    }
  }
};

// Pair of size triples with every |s_i - s*_i| at least `margin`, so that
// the central difference never straddles a min() or |.| kink.
std::pair<SizeTriple, SizeTriple> sample_triples(std::mt19937_64& rng, double margin,
                                                 int sign_pattern = -1) {
  std::uniform_real_distribution<double> dim(0.5, 5.0);
  std::uniform_real_distribution<double> delta(margin, 0.4);
  std::bernoulli_distribution coin;
  SizeTriple s_star{dim(rng), dim(rng), dim(rng)};
  SizeTriple s = s_star;
  for (int i = 0; i < 3; ++i) {
    const bool above = sign_pattern >= 0 ? ((sign_pattern >> i) & 1) != 0 : coin(rng);
    const double d = delta(rng);
    s[i] = above ? s_star[i] + d : std::max(0.1, s_star[i] - d);
    if (std::abs(s[i] - s_star[i]) < margin) s[i] = s_star[i] + (above ? margin : -margin);
  }
  return {s, s_star};
}

}  // namespace

double central_difference(const std::function<double(double)>& f, double x, double step) {
  return (f(x + step) - f(x - step)) / (2.0 * step);
}

std::vector<PropertyResult> run_loss_check(const LossCheckOptions& options) {
  if (options.trials < 1) {
    throw InvalidArgument("loss check requires at least one trial");
  }
  std::mt19937_64 rng(options.seed);
  std::vector<PropertyResult> results;

  auto finish = [&results](const char* name, const Worst& worst, double tol) {
    results.push_back({name, worst.error <= tol, worst.error, tol, worst.where});
  };

  // IoU size loss, stop-gradient form: finite differences of the loss with
  // the 1/s denominators frozen at the evaluation point.
  {
    Worst worst;
    for (int t = 0; t < options.trials; ++t) {
      auto [s, s_star] = sample_triples(rng, 1e-3);
      auto analytic = size_loss_iou(s, s_star).grad;
      if (options.corrupt_gradient) analytic[0] += 1e-3;
      for (int i = 0; i < 3; ++i) {
        auto frozen = [&, i](double v) {
          double sum = 0.0;
          for (int j = 0; j < 3; ++j) {
            const double sj = j == i ? v : s[j];
            sum += std::abs(sj - s_star[j]) / s[j];
          }
          return sum;
        };
        const double fd = central_difference(frozen, s[i], kStep);
        worst.update(rel_error(analytic[static_cast<std::size_t>(i)], fd),
                     fmt_triples(s, s_star) + " comp=" + std::to_string(i));
      }
    }
    finish("size_loss_iou stop-gradient vs finite differences", worst, 1e-6);
  }

  // Naive form: finite differences of the full loss, denominator varying.
  {
    Worst worst;
    for (int t = 0; t < options.trials; ++t) {
      auto [s, s_star] = sample_triples(rng, 1e-3);
      const auto analytic = size_loss_iou_naive_gradient(s, s_star);
      for (int i = 0; i < 3; ++i) {
        auto full = [&, i](double v) {
          SizeTriple probe = s;
          probe[i] = v;
          return size_loss_iou(probe, s_star).value;
        };
        const double fd = central_difference(full, s[i], kStep);
        worst.update(rel_error(analytic[static_cast<std::size_t>(i)], fd),
                     fmt_triples(s, s_star) + " comp=" + std::to_string(i));
      }
    }
    finish("size_loss_iou naive gradient vs finite differences", worst, 1e-6);
  }

  // Axis-aligned IoU partials, all 8 sign patterns of s_i vs s*_i.
  {
    Worst worst;
    for (int t = 0; t < options.trials; ++t) {
      auto [s, s_star] = sample_triples(rng, 1e-3, t % 8);
      const auto partials = iou_partial_ratio(s, s_star);
      for (int i = 0; i < 3; ++i) {
        auto f = [&, i](double v) {
          std::array<double, 3> probe = {s.h, s.w, s.l};
          probe[static_cast<std::size_t>(i)] = v;
          return iou_3d_axis_aligned(probe, {s_star.h, s_star.w, s_star.l});
        };
        const double fd = central_difference(f, s[i], kStep);
        worst.update(rel_error(partials.d[static_cast<std::size_t>(i)], fd),
                     fmt_triples(s, s_star) + " comp=" + std::to_string(i) + " pattern=" +
                         std::to_string(t % 8));
      }
    }
    finish("iou_partial_ratio vs finite differences (8 sign patterns)", worst, 1e-6);
  }

  // Closed forms: Case 1 (all below) partials equal prod(s_j, j != i)/V*,
  // i.e. the ratio 1/h : 1/w : 1/l; Case 3 (h above only) magnitudes equal
  // (w l / V* : 1/w : 1/l) scaled by h* V* / U^2.
  {
    Worst worst;
    for (int t = 0; t < options.trials; ++t) {
      {
        auto [s, s_star] = sample_triples(rng, 1e-3, 0);
        const auto partials = iou_partial_ratio(s, s_star);
        const double v_star = s_star.volume();
        for (int i = 0; i < 3; ++i) {
          const double expected = (s.volume() / s[i]) / v_star;
          worst.update(rel_error(partials.d[static_cast<std::size_t>(i)], expected),
                       "case1 " + fmt_triples(s, s_star));
        }
      }
      {
        auto [s, s_star] = sample_triples(rng, 1e-3, 1);  // h above, w and l below
        const auto partials = iou_partial_ratio(s, s_star);
        const double inter = s_star.h * s.w * s.l;
        const double uni = s.volume() + s_star.volume() - inter;
        const double dh = -inter * s.w * s.l / (uni * uni);
        const double dw = s_star.h * s.l * s_star.volume() / (uni * uni);
        const double dl = s_star.h * s.w * s_star.volume() / (uni * uni);
        worst.update(rel_error(partials.d[0], dh), "case3 h " + fmt_triples(s, s_star));
        worst.update(rel_error(partials.d[1], dw), "case3 w " + fmt_triples(s, s_star));
        worst.update(rel_error(partials.d[2], dl), "case3 l " + fmt_triples(s, s_star));
      }
    }
    finish("iou_partial_ratio closed forms (Case 1, Case 3)", worst, 1e-12);
  }

  // Laplace depth loss gradients.
  {
    Worst worst;
    std::uniform_real_distribution<double> depth(1.0, 80.0);
    std::uniform_real_distribution<double> err(1e-3, 5.0);
    std::uniform_real_distribution<double> sig(0.1, 5.0);
    std::bernoulli_distribution coin;
    for (int t = 0; t < options.trials; ++t) {
      const double d_star = depth(rng);
      const double d = d_star + (coin(rng) ? 1.0 : -1.0) * err(rng);
      const double sigma = sig(rng);
      const auto res = depth_loss_laplace({d, sigma}, d_star);
      const double fd_d = central_difference(
          [&](double v) { return depth_loss_laplace({v, sigma}, d_star).value; }, d, kStep);
      const double fd_s = central_difference(
          [&](double v) { return depth_loss_laplace({d, v}, d_star).value; }, sigma, kStep);
      char buf[96];
      std::snprintf(buf, sizeof(buf), "d=%.9g d*=%.9g sigma=%.9g", d, d_star, sigma);
      worst.update(rel_error(res.d_depth, fd_d), buf);
      worst.update(rel_error(res.d_sigma, fd_s), buf);
    }
    finish("depth_loss_laplace gradients vs finite differences", worst, 1e-6);
  }

  // Gaussian depth loss gradients; the sigma gradient is w.r.t. the variance.
  {
    Worst worst;
    std::uniform_real_distribution<double> depth(1.0, 80.0);
    std::uniform_real_distribution<double> err(1e-3, 5.0);
    std::uniform_real_distribution<double> var(0.05, 9.0);
    std::bernoulli_distribution coin;
    for (int t = 0; t < options.trials; ++t) {
      const double d_star = depth(rng);
      const double d = d_star + (coin(rng) ? 1.0 : -1.0) * err(rng);
      const double v = var(rng);
      const auto res = depth_loss_gaussian({d, std::sqrt(v)}, d_star);
      const double fd_d = central_difference(
          [&](double t1) { return depth_loss_gaussian({t1, std::sqrt(v)}, d_star).value; }, d,
          kStep);
      const double fd_v = central_difference(
          [&](double t1) { return depth_loss_gaussian({d, std::sqrt(t1)}, d_star).value; }, v,
          kStep);
      char buf[96];
      std::snprintf(buf, sizeof(buf), "d=%.9g d*=%.9g var=%.9g", d, d_star, v);
      worst.update(rel_error(res.d_depth, fd_d), buf);
      worst.update(rel_error(res.d_sigma, fd_v), buf);
    }
    finish("depth_loss_gaussian gradients vs finite differences", worst, 1e-6);
  }

  // Compensation identity: w_s * L_size reproduces the L1 loss per sample.
  {
    Worst worst;
    const int n = std::max(options.trials, 10000);
    for (int t = 0; t < n; ++t) {
      auto [s, s_star] = sample_triples(rng, 1e-6);
      const double l1 = size_loss_l1(s, s_star);
      const auto comp = size_loss_compensated(s, s_star);
      worst.update(rel_error(comp.value, l1), fmt_triples(s, s_star));
    }
    finish("compensation identity |w*Liou - L1| (relative)", worst, 1e-12);
  }

  // Heading encode/decode round trip modulo 2pi.
  {
    Worst worst;
    std::uniform_real_distribution<double> angle(-20.0, 20.0);
    const int n = std::max(options.trials, 10000);
    for (int t = 0; t < n; ++t) {
      const double theta = angle(rng);
      const double back = heading_decode(heading_encode(theta));
      const double err = std::abs(normalize_angle(back - theta));
      char buf[48];
      std::snprintf(buf, sizeof(buf), "theta=%.12g", theta);
      worst.update(err, buf);
    }
    finish("heading encode/decode round trip (absolute, mod 2pi)", worst, 1e-12);
  }

  // Soft weights collapse to the hard scheme as T -> 0.
  {
    Worst worst;
    const double c = options.weight_center;
    SampleWeightParams soft{WeightScheme::Soft, c, c, 1e-4};
    SampleWeightParams hard{WeightScheme::Hard, c, c, 1.0};
    std::uniform_real_distribution<double> around(-30.0, 30.0);
    auto check = [&](double d) {
      if (d < 0.0 || std::abs(d - c) <= 0.01) return;
      const double diff = std::abs(sample_weight(d, soft) - sample_weight(d, hard));
      char buf[48];
      std::snprintf(buf, sizeof(buf), "d=%.9g", d);
      worst.update(diff, buf);
    };
    for (int t = 0; t < options.trials; ++t) check(c + around(rng));
    for (double d = 0.0; d <= c + 30.0; d += 0.5) check(d);
    check(c + 0.0101);
    check(c - 0.0101);
    if (sample_weight(c, soft) != 0.5) {
      worst.update(1.0, "midpoint d=c not exactly 0.5");
    }
    finish("soft weight matches hard scheme away from the step (absolute)", worst, 1e-3);
  }

  return results;
}

}  // namespace mono3d
