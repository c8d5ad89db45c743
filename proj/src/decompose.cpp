#include "tweedie/decompose.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "tweedie/error.hpp"
#include "tweedie/random.hpp"

namespace tweedie {

double expansion_loss(const LossKind& kind, double pred, double target) {
  if (const auto* t = std::get_if<loss::TweediePow>(&kind)) {
    return tweedie_loss(pred, target, t->p);
  }
  if (std::holds_alternative<loss::MeanSquared>(kind)) {
    return mse_loss(pred, target);
  }
  if (!(target > 0.0)) {
    throw Error(ErrorCode::kDomainError,
                "log-loss expansion around pred = 1 needs a positive label");
  }
  if (!(pred > 0.0)) {
    throw Error(ErrorCode::kDomainError, "prediction must be > 0");
  }
  // -ln(sqrt(pred)), continued past probability 1 so the window can be
  // symmetric in f.
  const double positive = -0.5 * std::log(pred);
  return std::holds_alternative<loss::WeightedLogLoss>(kind) ? target * positive
                                                             : positive;
}

Eigen::VectorXd taylor_coeffs(const ScalarLoss& loss, const TaylorOptions& opt,
                              double* residual) {
  if (!(opt.window > 0.0 && opt.window < 1.0)) {
    throw Error(ErrorCode::kValidation, "window must lie in (0, 1)");
  }
  if (opt.order < 1 || opt.guard_terms < 0) {
    throw Error(ErrorCode::kValidation, "order must be >= 1, guard_terms >= 0");
  }
  if (opt.n_points < 20) {
    throw Error(ErrorCode::kValidation, "n_points must be >= 20");
  }
  const int powers = opt.order + opt.guard_terms;
  const Eigen::Index n = opt.n_points;

  // Columns are powers of u = f / window, which keeps the design well
  // conditioned; coefficients are rescaled by window^-k afterwards.
  Eigen::MatrixXd design(n, powers);
  Eigen::VectorXd rhs(n);
  const double base = loss(1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    const double f = u * opt.window;
    const double pred = (1.0 - f) * (1.0 - f);
    double power = 1.0;
    for (int k = 0; k < powers; ++k) {
      power *= u;
      design(i, k) = power;
    }
    rhs[i] = loss(pred) - base;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-12);
  if (qr.rank() < powers) {
    throw Error(ErrorCode::kDegenerateFit,
                "design of " + std::to_string(n) + " points cannot resolve " +
                    std::to_string(powers) + " powers");
  }
  const Eigen::VectorXd scaled = qr.solve(rhs);
  if (residual) {
    *residual = std::sqrt((design * scaled - rhs).squaredNorm() /
                          static_cast<double>(n));
  }
  Eigen::VectorXd coeffs(opt.order);
  double w_power = 1.0;
  for (int k = 0; k < opt.order; ++k) {
    w_power *= opt.window;
    coeffs[k] = scaled[k] / w_power;
  }
  return coeffs;
}

BasisCoeffs taylor_coeffs(const LossKind& kind, double target,
                          const TaylorOptions& options) {
  validate_kind(kind);
  BasisCoeffs out{kind, target, {}, 0.0};
  out.coeffs = taylor_coeffs(
      [&](double pred) { return expansion_loss(kind, pred, target); }, options,
      &out.residual);
  return out;
}

Sensitivity sensitivity_compare(double p, const TaylorOptions& options) {
  const BasisCoeffs tweedie = taylor_coeffs(loss::TweediePow{p}, 1.0, options);
  const BasisCoeffs log = taylor_coeffs(loss::LogLoss{}, 1.0, options);
  if (tweedie.coeffs.size() < 2) {
    throw Error(ErrorCode::kValidation, "sensitivity needs order >= 2");
  }
  return {tweedie.coeffs[1], log.coeffs[1]};
}

ProjectionSolution solve_projection(const MetricObservations& obs) {
  const Eigen::MatrixXd& c = obs.coeff_matrix;
  const Eigen::Index n = c.rows();
  const Eigen::Index k = c.cols();
  if (k < 1 || n < k) {
    throw Error(ErrorCode::kRankDeficient,
                "need at least as many observations as coefficients");
  }
  if (obs.watch_metric.size() != n || obs.conversion_metric.size() != n) {
    throw Error(ErrorCode::kValidation, "metric vectors must have one entry per row");
  }
  if (!c.allFinite() || !obs.watch_metric.allFinite() ||
      !obs.conversion_metric.allFinite()) {
    throw Error(ErrorCode::kValidation, "observations must be finite");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(c);
  qr.setThreshold(1e-10);
  if (qr.rank() < k) {
    throw Error(ErrorCode::kRankDeficient,
                "coefficient matrix has rank " + std::to_string(qr.rank()) +
                    " < " + std::to_string(k));
  }
  ProjectionSolution s;
  s.t = qr.solve(obs.watch_metric);
  s.v = qr.solve(obs.conversion_metric);
  s.watch_residual = (c * s.t - obs.watch_metric).norm();
  s.conversion_residual = (c * s.v - obs.conversion_metric).norm();
  s.t_stderr = Eigen::VectorXd::Zero(k);
  s.v_stderr = Eigen::VectorXd::Zero(k);
  if (n > k) {
    const Eigen::VectorXd diag =
        (c.transpose() * c).ldlt().solve(Eigen::MatrixXd::Identity(k, k)).diagonal();
    const double dof = static_cast<double>(n - k);
    s.t_stderr = (diag * (s.watch_residual * s.watch_residual / dof)).cwiseSqrt();
    s.v_stderr =
        (diag * (s.conversion_residual * s.conversion_residual / dof)).cwiseSqrt();
  }
  return s;
}

Composition compose_loss(const Eigen::VectorXd& t,
                         const std::vector<Eigen::VectorXd>& library) {
  if (library.empty()) {
    throw Error(ErrorCode::kDegenerate, "loss library is empty");
  }
  const Eigen::Index dim = t.size();
  Eigen::MatrixXd basis(dim, static_cast<Eigen::Index>(library.size()));
  for (std::size_t g = 0; g < library.size(); ++g) {
    if (library[g].size() != dim) {
      throw Error(ErrorCode::kValidation, "library vector dimension mismatch");
    }
    basis.col(static_cast<Eigen::Index>(g)) = library[g];
  }
  if (basis.cwiseAbs().maxCoeff() == 0.0) {
    throw Error(ErrorCode::kDegenerate, "every library vector is zero");
  }
  if (t.norm() == 0.0) {
    throw Error(ErrorCode::kDegenerate, "target vector is zero");
  }

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(basis);
  cod.setThreshold(1e-12);
  Composition out;
  out.weights = cod.solve(t);
  out.combination = basis * out.weights;
  const double norm = out.combination.norm();
  if (norm <= 1e-12 * t.norm()) {
    out.weights.setZero();
    out.combination.setZero();
    out.cosine = 0.0;
    return out;
  }
  out.weights /= norm;
  out.combination /= norm;
  out.cosine = out.combination.dot(t) / t.norm();
  return out;
}

Composition compose_loss(const Eigen::VectorXd& t,
                         const std::vector<BasisCoeffs>& library) {
  std::vector<Eigen::VectorXd> vectors;
  vectors.reserve(library.size());
  for (const BasisCoeffs& b : library) vectors.push_back(b.coeffs);
  return compose_loss(t, vectors);
}

MetricObservations plant_observations(const Eigen::VectorXd& t,
                                      const Eigen::VectorXd& v, int n_rows,
                                      double noise_sd, std::uint64_t seed) {
  if (t.size() != v.size() || t.size() < 1) {
    throw Error(ErrorCode::kValidation, "planted vectors need equal, nonzero length");
  }
  if (n_rows < t.size()) {
    throw Error(ErrorCode::kValidation, "need at least as many rows as coefficients");
  }
  if (!(noise_sd >= 0.0)) throw Error(ErrorCode::kValidation, "noise sd must be >= 0");
  Stream stream = Stream::derive(seed, "decompose.plant");
  MetricObservations obs;
  obs.coeff_matrix.resize(n_rows, t.size());
  for (Eigen::Index i = 0; i < obs.coeff_matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < obs.coeff_matrix.cols(); ++j) {
      obs.coeff_matrix(i, j) = stream.normal();
    }
  }
  obs.watch_metric = obs.coeff_matrix * t;
  obs.conversion_metric = obs.coeff_matrix * v;
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    obs.watch_metric[i] += noise_sd * stream.normal();
    obs.conversion_metric[i] += noise_sd * stream.normal();
  }
  return obs;
}

MetricObservations read_observations(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t row_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++row_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<double> fields;
    std::stringstream stream(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(stream, cell, ',')) {
      try {
        std::size_t used = 0;
        fields.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) {
          numeric = false;
        }
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (first_content) {
        first_content = false;  // header
        continue;
      }
      throw Error(ErrorCode::kValidation,
                  "row " + std::to_string(row_no) + ": malformed value in '" +
                      line + "'");
    }
    first_content = false;
    if (fields.size() < 3) {
      throw Error(ErrorCode::kValidation,
                  "row " + std::to_string(row_no) +
                      ": need coefficients plus two metrics");
    }
    if (!rows.empty() && fields.size() != rows.front().size()) {
      throw Error(ErrorCode::kValidation,
                  "row " + std::to_string(row_no) + ": expected " +
                      std::to_string(rows.front().size()) + " columns, got " +
                      std::to_string(fields.size()));
    }
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw Error(ErrorCode::kEmptySample, "no observation rows");

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto k = static_cast<Eigen::Index>(rows.front().size()) - 2;
  MetricObservations obs;
  obs.coeff_matrix.resize(n, k);
  obs.watch_metric.resize(n);
  obs.conversion_metric.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < k; ++j) obs.coeff_matrix(i, j) = r[j];
    obs.watch_metric[i] = r[k];
    obs.conversion_metric[i] = r[k + 1];
  }
  return obs;
}

void write_observations(std::ostream& out, const MetricObservations& obs) {
  out.precision(std::numeric_limits<double>::max_digits10);
  const Eigen::Index k = obs.coeff_matrix.cols();
  for (Eigen::Index j = 0; j < k; ++j) out << 'c' << j + 1 << ',';
  out << "watch_metric,conversion_metric\n";
  for (Eigen::Index i = 0; i < obs.coeff_matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < k; ++j) out << obs.coeff_matrix(i, j) << ',';
    out << obs.watch_metric[i] << ',' << obs.conversion_metric[i] << '\n';
  }
}

}  // namespace tweedie
