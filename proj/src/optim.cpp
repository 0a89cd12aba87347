#include "optim.hpp"

#include <cmath>
#include <limits>

namespace tmap::optim {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;

double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                               const std::vector<bool>& nonnegative) {
  double norm = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double gi = g[i];
    if (nonnegative[i] && x[i] <= 0.0) gi = std::min(gi, 0.0);
    norm = std::max(norm, std::abs(gi));
  }
  return norm;
}

}  // namespace

Result projected_newton(const Objective& f, const GradientHessian& derivatives, const std::vector<bool>& nonnegative,
                        Eigen::VectorXd x0, const NewtonOptions& options) {
  const Eigen::Index n = x0.size();
  Result r;
  r.x = std::move(x0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (nonnegative[i] && r.x[i] < 0.0) r.x[i] = 0.0;
  }
  r.value = f(r.x);
  r.history.push_back(r.value);

  Eigen::VectorXd g(n);
  Eigen::MatrixXd h(n, n);
  for (r.iterations = 0; r.iterations < options.max_iterations; ++r.iterations) {
    derivatives(r.x, g, h);
    r.gradient_norm = projected_gradient_norm(r.x, g, nonnegative);
    if (r.gradient_norm <= options.gradient_tolerance) {
      r.converged = true;
      return r;
    }

    // Variables pinned at their bound with a gradient pushing outward are
    // moved by a scaled gradient step; the rest take a Newton step.
    Eigen::VectorXd projected = r.x - g;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (nonnegative[i]) projected[i] = std::max(projected[i], 0.0);
    }
    const double eps = std::min(1e-6, (r.x - projected).norm());
    std::vector<Eigen::Index> free;
    std::vector<bool> pinned(n, false);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (nonnegative[i] && r.x[i] <= eps && g[i] > 0.0) {
        pinned[i] = true;
      } else {
        free.push_back(i);
      }
    }

    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    if (!free.empty()) {
      const auto nf = static_cast<Eigen::Index>(free.size());
      Eigen::MatrixXd hf(nf, nf);
      Eigen::VectorXd gf(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        gf[a] = g[free[a]];
        for (Eigen::Index b = 0; b < nf; ++b) hf(a, b) = h(free[a], free[b]);
      }
      Eigen::LLT<Eigen::MatrixXd> llt(hf);
      double ridge = 1e-12 * std::max(1.0, hf.diagonal().cwiseAbs().maxCoeff());
      while (llt.info() != Eigen::Success) {
        hf.diagonal().array() += ridge;
        llt.compute(hf);
        ridge *= 10.0;
      }
      const Eigen::VectorXd df = -llt.solve(gf);
      for (Eigen::Index a = 0; a < nf; ++a) d[free[a]] = df[a];
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (pinned[i]) d[i] = -g[i] / std::max(h(i, i), 1e-12);
    }

    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial(n);
    for (int bt = 0; bt < kMaxBacktracks; ++bt, step *= 0.5) {
      trial = r.x + step * d;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (nonnegative[i]) trial[i] = std::max(trial[i], 0.0);
      }
      double decrease = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        decrease += pinned[i] ? g[i] * (r.x[i] - trial[i]) : -step * g[i] * d[i];
      }
      const double ft = f(trial);
      if (std::isfinite(ft) && ft <= r.value - kArmijo * decrease) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      r.stalled = true;
      r.converged = r.gradient_norm <= options.stall_tolerance;
      return r;
    }
    r.x = trial;
    r.value = f(r.x);
    r.history.push_back(r.value);
  }
  derivatives(r.x, g, h);
  r.gradient_norm = projected_gradient_norm(r.x, g, nonnegative);
  r.converged = r.gradient_norm <= options.gradient_tolerance;
  return r;
}

Result bfgs(const Objective& f, const Gradient& gradient, Eigen::VectorXd x0, const BfgsOptions& options) {
  const Eigen::Index n = x0.size();
  Result r;
  r.x = std::move(x0);
  r.value = f(r.x);
  r.history.push_back(r.value);
  if (!std::isfinite(r.value)) return r;

  Eigen::VectorXd g(n);
  gradient(r.x, g);
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;
  Eigen::VectorXd trial(n);
  Eigen::VectorXd g_new(n);

  for (r.iterations = 0; r.iterations < options.max_iterations; ++r.iterations) {
    r.gradient_norm = g.cwiseAbs().maxCoeff();
    if (r.gradient_norm <= options.gradient_tolerance) {
      r.converged = true;
      return r;
    }
    Eigen::VectorXd d = -hinv * g;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      hinv.setIdentity();
      d = -g;
      slope = -g.squaredNorm();
    }

    double step = 1.0;
    bool accepted = false;
    double ft = 0.0;
    for (int bt = 0; bt < kMaxBacktracks; ++bt, step *= 0.5) {
      trial = r.x + step * d;
      ft = f(trial);
      if (std::isfinite(ft) && ft <= r.value + kArmijo * step * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (hinv.isIdentity()) {
        r.stalled = true;
        r.converged = r.gradient_norm <= options.stall_tolerance;
        return r;
      }
      hinv.setIdentity();
      continue;
    }

    gradient(trial, g_new);
    const Eigen::VectorXd s = trial - r.x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        hinv *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = hinv * y;
      hinv += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) - rho * (hy * s.transpose() + s * hy.transpose());
    }
    r.x = trial;
    r.value = ft;
    g = g_new;
    r.history.push_back(r.value);
  }
  r.gradient_norm = g.cwiseAbs().maxCoeff();
  r.converged = r.gradient_norm <= options.gradient_tolerance;
  return r;
}

}  // namespace tmap::optim
