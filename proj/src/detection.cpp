#include "outsel/detection.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace outsel {

std::string toString(DetectionMethod m) {
  switch (m) {
    case DetectionMethod::Cooks:
      return "cooks";
    case DetectionMethod::Dffits:
      return "dffits";
    case DetectionMethod::SoftIpod:
      return "softipod";
  }
  return "unknown";
}

DetectionMethod parseDetectionMethod(const std::string& name) {
  if (name == "cooks") return DetectionMethod::Cooks;
  if (name == "dffits") return DetectionMethod::Dffits;
  if (name == "softipod") return DetectionMethod::SoftIpod;
  throw ValidationError("unknown detection method '" + name + "' (cooks | dffits | softipod)");
}

double defaultDffitsThreshold(Index n, Index p) {
  return 2.0 * std::sqrt(static_cast<double>(p) / static_cast<double>(n));
}

namespace {

void checkCutoff(double cutoff) {
  if (!(cutoff > 0.0) || !std::isfinite(cutoff)) {
    throw ValidationError("detection cutoff must be positive and finite");
  }
}

std::shared_ptr<const ColumnSpaceProjector> fullProjector(const OlsFit& full) {
  return std::make_shared<const ColumnSpaceProjector>(full.qBasis);
}

void splitByFlag(const std::vector<char>& isInlier, IndexSet& inliers, IndexSet& outliers) {
  for (size_t i = 0; i < isInlier.size(); ++i) {
    (isInlier[i] ? inliers : outliers).push_back(static_cast<Index>(i));
  }
}

}  // namespace

Vector cooksDistances(const Dataset& data, Execution exec) {
  const OlsFit full = fitOls(data);
  const Index n = data.n();
  const double p = static_cast<double>(data.p());
  Vector d(n);
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) {
      const double h = full.leverage(i), e = full.residuals(i);
      d(i) = e * e / (p * full.sigmaSq) * h / ((1 - h) * (1 - h));
    }
  } else {
    for (Index i = 0; i < n; ++i) {
      const double h = full.leverage(i), e = full.residuals(i);
      d(i) = e * e / (p * full.sigmaSq) * h / ((1 - h) * (1 - h));
    }
  }
  return d;
}

Vector dffits(const Dataset& data) {
  const OlsFit full = fitOls(data);
  const Index n = data.n();
  const double p = static_cast<double>(data.p());
  const double nn = static_cast<double>(n);
  if (n - data.p() - 1 < 1) throw ValidationError("DFFITS needs n - p - 1 >= 1");
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    const double h = full.leverage(i), e = full.residuals(i);
    const double s2 = (full.rss - e * e / (1 - h)) / (nn - p - 1);
    if (!(s2 > 0.0)) {
      throw NumericalError("leave-one-out variance is not positive for observation " +
                           std::to_string(i + 1));
    }
    out(i) = e * std::sqrt(h) / (std::sqrt(s2) * (1 - h));
  }
  return out;
}

DetectionResult detectCooks(const Dataset& data, double lambda, Execution exec) {
  checkCutoff(lambda);
  const OlsFit full = fitOls(data);
  const Index n = data.n();
  const double nn = static_cast<double>(n), p = static_cast<double>(data.p());
  const Vector d = cooksDistances(data, exec);
  const double threshold = lambda / nn;

  std::vector<char> isInlier(static_cast<size_t>(n));
  SelectionEvent::Group group(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const bool in = d(i) < threshold;
    isInlier[static_cast<size_t>(i)] = in;
    const double h = full.leverage(i);
    const double orient = in ? 1.0 : -1.0;
    auto& c = group[static_cast<size_t>(i)];
    c.projectorScale = orient * (lambda * p / nn) * (1 - h) * (1 - h);
    c.residualSquares.push_back({i, -orient * (nn - p) * h});
  }

  DetectionResult res{DetectionMethod::Cooks, lambda, {}, {},
                      SelectionEvent(n, fullProjector(full), {std::move(group)}), d, std::nullopt};
  splitByFlag(isInlier, res.inliers, res.outliers);
  return res;
}

DetectionResult detectDffits(const Dataset& data, double threshold) {
  checkCutoff(threshold);
  const OlsFit full = fitOls(data);
  const Index n = data.n();
  const double nn = static_cast<double>(n), p = static_cast<double>(data.p());
  const Vector scores = dffits(data).cwiseAbs();
  const double c2 = threshold * threshold;

  std::vector<char> isInlier(static_cast<size_t>(n));
  SelectionEvent::Group group(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const bool in = scores(i) * scores(i) < c2;
    isInlier[static_cast<size_t>(i)] = in;
    const double h = full.leverage(i);
    const double orient = in ? 1.0 : -1.0;
    // c^2 (1-h)^2 |r|^2 - (c^2 (1-h) + h (n-p-1)) r_i^2 >= 0  <=>  DFFITS_i^2 <= c^2
    auto& c = group[static_cast<size_t>(i)];
    c.projectorScale = orient * c2 * (1 - h) * (1 - h);
    c.residualSquares.push_back({i, -orient * (c2 * (1 - h) + h * (nn - p - 1))});
  }

  DetectionResult res{DetectionMethod::Dffits, threshold, {}, {},
                      SelectionEvent(n, fullProjector(full), {std::move(group)}), scores,
                      std::nullopt};
  splitByFlag(isInlier, res.inliers, res.outliers);
  return res;
}

double softIpodObjective(const Dataset& data, double lambda, const Vector& beta, const Vector& u) {
  const double nn = static_cast<double>(data.n());
  return (data.y - data.X * beta - u).squaredNorm() / (2.0 * nn) + lambda * u.lpNorm<1>();
}

namespace {

double softThreshold(double x, double level) {
  if (x > level) return x - level;
  if (x < -level) return x + level;
  return 0.0;
}

/// (I - P)_{AA} for the support A.
Matrix residualBlock(const ColumnSpaceProjector& proj, const IndexSet& A) {
  const Matrix UA = gatherRows(proj.basis(), A);
  return Matrix::Identity(static_cast<Index>(A.size()), static_cast<Index>(A.size())) -
         UA * UA.transpose();
}

double kktResidual(const Vector& residual, const Vector& u, double nLambda, double nn) {
  double worst = 0.0;
  for (Index i = 0; i < u.size(); ++i) {
    const double g = residual(i) / nn;
    const double lam = nLambda / nn;
    const double v = u(i) != 0.0 ? std::abs(g - lam * (u(i) > 0 ? 1.0 : -1.0))
                                 : std::max(0.0, std::abs(g) - lam);
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace

SoftIpodSolution solveSoftIpod(const Dataset& data, double lambda, const SoftIpodOptions& opt) {
  checkCutoff(lambda);
  const OlsFit full = fitOls(data);
  const ColumnSpaceProjector proj(full.qBasis);
  const Index n = data.n();
  const double nn = static_cast<double>(n);
  const double level = nn * lambda;

  SoftIpodSolution sol;
  sol.u = Vector::Zero(n);
  Vector next(n);
  bool converged = false;
  for (int it = 1; it <= opt.maxIterations; ++it) {
    // beta-step leaves y - X beta = y - P (y - u).
    const Vector fittedResidual = data.y - proj.project(data.y - sol.u);
    double change = 0.0;
    for (Index i = 0; i < n; ++i) {
      next(i) = softThreshold(fittedResidual(i), level);
      change = std::max(change, std::abs(next(i) - sol.u(i)));
    }
    sol.u.swap(next);
    sol.iterations = it;
    if (change <= opt.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NumericalError("soft-IPOD did not converge in " + std::to_string(opt.maxIterations) +
                         " iterations");
  }

  // Polish on the identified (support, signs): u_A = P_AA^{-1} (r_A - n lambda s_A).
  IndexSet support;
  for (Index i = 0; i < n; ++i) {
    if (sol.u(i) != 0.0) support.push_back(i);
  }
  const Vector r = proj.residual(data.y);
  if (!support.empty()) {
    const Matrix PAA = residualBlock(proj, support);
    Vector rhs(static_cast<Index>(support.size()));
    for (size_t k = 0; k < support.size(); ++k) {
      const Index i = support[k];
      rhs(static_cast<Index>(k)) = r(i) - level * (sol.u(i) > 0 ? 1.0 : -1.0);
    }
    Eigen::FullPivLU<Matrix> lu(PAA);
    if (lu.isInvertible()) {
      const Vector uA = lu.solve(rhs);
      bool signsKept = true;
      for (size_t k = 0; k < support.size(); ++k) {
        if (uA(static_cast<Index>(k)) * sol.u(support[k]) <= 0.0) signsKept = false;
      }
      if (signsKept) {
        for (size_t k = 0; k < support.size(); ++k) sol.u(support[k]) = uA(static_cast<Index>(k));
      }
    }
  }
  const Vector yAdj = data.y - sol.u;
  sol.beta = full.pinvFactor * (full.qBasis.transpose() * yAdj);
  sol.kktResidual = kktResidual(proj.residual(yAdj), sol.u, level, nn);
  sol.objective = softIpodObjective(data, lambda, sol.beta, sol.u);
  return sol;
}

DetectionResult softIpodEvent(const Dataset& data, double lambda, const Vector& u) {
  checkCutoff(lambda);
  const Index n = data.n();
  if (u.size() != n) throw ValidationError("u has wrong length");
  const OlsFit full = fitOls(data);
  auto proj = fullProjector(full);
  const double level = static_cast<double>(n) * lambda;

  IndexSet support, inactive;
  std::vector<int> signs(static_cast<size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    if (u(i) != 0.0) {
      support.push_back(i);
      signs[static_cast<size_t>(i)] = u(i) > 0 ? 1 : -1;
    } else {
      inactive.push_back(i);
    }
  }
  const auto a = static_cast<Index>(support.size());
  Vector sA(a);
  for (Index k = 0; k < a; ++k) sA(k) = signs[static_cast<size_t>(support[static_cast<size_t>(k)])];

  Matrix PAAinv(a, a);
  if (a > 0) {
    const Matrix PAA = residualBlock(*proj, support);
    Eigen::FullPivLU<Matrix> lu(PAA);
    lu.setThreshold(kRankTolerance);
    if (!lu.isInvertible()) {
      throw NumericalError("soft-IPOD support columns of the residual projector are dependent");
    }
    PAAinv = lu.inverse();
  }
  const Vector PAAinvS = PAAinv * sA;

  SelectionEvent::Group group;
  // Active coordinates: s_i u_i(y) >= 0 with u_A(y) = P_AA^{-1}(r_A - n lambda s_A).
  for (Index k = 0; k < a; ++k) {
    QuadraticConstraint c;
    const double s = sA(k);
    for (Index l = 0; l < a; ++l) {
      c.residualLinear.push_back({support[static_cast<size_t>(l)], s * PAAinv(k, l)});
    }
    c.constant = -level * s * PAAinvS(k);
    group.push_back(std::move(c));
  }
  // Inactive coordinates: |r_j - c_j^T r_A + n lambda c_j^T s_A| <= n lambda,
  // c_j = P_AA^{-1} P_Aj and P_Aj = -U_A U_j^T off the diagonal.
  const Matrix UA = gatherRows(proj->basis(), support);
  const Vector r = proj->residual(data.y);
  for (Index j : inactive) {
    const Vector PAj = -(UA * proj->basis().row(j).transpose());
    const Vector cj = PAAinv * PAj;
    const double offset = level * cj.dot(sA);
    for (double orient : {1.0, -1.0}) {
      // level - orient * g_j(y) >= 0
      QuadraticConstraint c;
      c.residualLinear.push_back({j, -orient});
      for (Index l = 0; l < a; ++l) {
        c.residualLinear.push_back({support[static_cast<size_t>(l)], orient * cj(l)});
      }
      c.constant = level - orient * offset;
      group.push_back(std::move(c));
    }
    double g = r(j) + offset;
    for (Index l = 0; l < a; ++l) g -= cj(l) * r(support[static_cast<size_t>(l)]);
    if (std::abs(std::abs(g) - level) <= 1e-12 * level) {
      std::ostringstream msg;
      msg << "soft-IPOD subgradient of observation " << j + 1 << " sits exactly at +-1";
      throw NumericalError(msg.str());
    }
  }

  DetectionResult res{DetectionMethod::SoftIpod, lambda, inactive, support,
                      SelectionEvent(n, proj, {std::move(group)}), u.cwiseAbs(),
                      std::move(signs)};
  return res;
}

DetectionResult detect(const Dataset& data, const DetectionConfig& config, Execution exec) {
  DetectionResult result = [&] {
    switch (config.method) {
      case DetectionMethod::Cooks:
        return detectCooks(data, config.cutoff, exec);
      case DetectionMethod::Dffits:
        return detectDffits(data, config.cutoff);
      case DetectionMethod::SoftIpod: {
        const auto sol = solveSoftIpod(data, config.cutoff);
        return softIpodEvent(data, config.cutoff, sol.u);
      }
    }
    throw ValidationError("unknown detection method");
  }();
  requireEnoughInliers(result, data.p());
  return result;
}

void requireEnoughInliers(const DetectionResult& result, Index p) {
  if (static_cast<Index>(result.inliers.size()) <= p) {
    throw NumericalError("too many outliers removed for inference (" +
                         std::to_string(result.inliers.size()) + " rows left, p = " +
                         std::to_string(p) + ")");
  }
}

}  // namespace outsel
