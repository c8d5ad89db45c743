#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "tweedie/losses.hpp"

namespace tweedie {

/// Basis variable of the expansion around pred = 1: f = 1 - sqrt(pred).
inline double basis_variable(double pred) { return 1.0 - std::sqrt(pred); }

struct TaylorOptions {
  /// f is sampled on [-window, window].
  double window = 0.05;
  int n_points = 41;
  /// Reported coefficients c_1..c_order.
  int order = 3;
  /// Extra powers fitted above `order` and then discarded, so that the
  /// reported coefficients are not biased by the loss's higher-order terms.
  int guard_terms = 4;
};

struct BasisCoeffs {
  LossKind kind;
  double target = 1.0;
  Eigen::VectorXd coeffs;
  /// RMS residual of the least-squares fit over the window.
  double residual = 0.0;
};

/// The per-sample loss as a function of a shared prediction pred > 0, used
/// for coefficient extraction. Regression kinds use their training loss with
/// target `target`. Classification kinds are evaluated at click probability
/// sqrt(pred), so f is the complement of that probability; the click label
/// is target > 0 and the weighted kind is scaled by `target`.
double expansion_loss(const LossKind& kind, double pred, double target);

using ScalarLoss = std::function<double(double pred)>;

/// Least-squares coefficients of loss(pred(f)) - loss(pred(0)) on
/// f, f^2, ..., f^order. Throws kDegenerateFit when the design is singular.
Eigen::VectorXd taylor_coeffs(const ScalarLoss& loss, const TaylorOptions& options,
                              double* residual = nullptr);
BasisCoeffs taylor_coeffs(const LossKind& kind, double target,
                          const TaylorOptions& options = {});

struct Sensitivity {
  double tweedie_c2 = 0.0;
  double logloss_c2 = 0.0;
};
/// Second-order coefficients of the Tweedie loss (power p) and the log-loss,
/// both at target 1.
Sensitivity sensitivity_compare(double p, const TaylorOptions& options = {});

/// One row per experiment: its loss coefficients and two observed metrics.
struct MetricObservations {
  Eigen::MatrixXd coeff_matrix;  // N x order
  Eigen::VectorXd watch_metric;
  Eigen::VectorXd conversion_metric;
};

struct ProjectionSolution {
  Eigen::VectorXd t;  // watch projection
  Eigen::VectorXd v;  // conversion projection
  double watch_residual = 0.0;       // ||C t - watch||
  double conversion_residual = 0.0;  // ||C v - conversion||
  /// Least-squares standard errors; zero when N equals the column count.
  Eigen::VectorXd t_stderr;
  Eigen::VectorXd v_stderr;
};

/// Solves watch = C t and conversion = C v by column-pivoted QR. Throws
/// kRankDeficient unless C has full column rank.
ProjectionSolution solve_projection(const MetricObservations& obs);

struct Composition {
  /// One weight per library member, scaled so the combination has unit norm.
  Eigen::VectorXd weights;
  Eigen::VectorXd combination;
  /// Cosine between the combination and t (0 when t is orthogonal to the
  /// library span).
  double cosine = 0.0;
};

/// Weights whose coefficient combination points along t as closely as the
/// library span allows (least-squares projection of t, minimum norm).
/// Throws kDegenerate when every library vector is zero.
Composition compose_loss(const Eigen::VectorXd& t,
                         const std::vector<Eigen::VectorXd>& library);
Composition compose_loss(const Eigen::VectorXd& t,
                         const std::vector<BasisCoeffs>& library);

/// Synthetic observations for planted t and v: rows of C ~ N(0, 1), metrics
/// C t and C v plus N(0, noise_sd^2) noise.
MetricObservations plant_observations(const Eigen::VectorXd& t,
                                      const Eigen::VectorXd& v, int n_rows,
                                      double noise_sd, std::uint64_t seed);

/// Rows "c1,...,ck,watch_metric,conversion_metric"; optional header and '#'
/// comments. Parse errors name the row number.
MetricObservations read_observations(std::istream& in);
void write_observations(std::ostream& out, const MetricObservations& obs);

}  // namespace tweedie
