#pragma once

// Entanglement-dimensionality certification from correlation matrices
// measured in two mutually unbiased bases (discrete momentum and
// position), via a fidelity lower bound to the maximally entangled
// d-mode target.

#include <Eigen/Dense>

#include "hyperent/spatial.hpp"

namespace hyperent {

struct CertificationResult {
    int d = 0;
    double f1 = 0.0;        // sum of conjugate-diagonal momentum probabilities
    double f2_tilde = 0.0;  // position-basis lower-bound term
    double f_tilde = 0.0;   // f1 + f2_tilde
    int certified_dim = 1;
    double gamma_penalty = 0.0;  // magnitude of the cross-term sum
    bool f_exceeds_one = false;  // flagged, see normalized variant
    // Normalized variant with explicit lambda_m = 1/sqrt(d) weights on
    // the diagonal term; equals 1 on ideal data.
    double f1_weighted = 0.0;
    double f_tilde_weighted = 0.0;
    int certified_dim_weighted = 1;
};

/// counts / total, elementwise. Throws on zero total.
Eigen::MatrixXd normalize_counts(const CorrelationMatrix& m);

/// Sum of conjugate-diagonal probabilities (the conjugation map is the
/// identity in mode labels by grid construction).
double fidelity_f1(const Eigen::MatrixXd& momentum_probs);

/// Lower bound on the off-diagonal fidelity term from the two bases.
/// Evaluated through residue classes of (m - n) mod d in O(d^2).
double fidelity_f2_lower(const Eigen::MatrixXd& momentum_probs,
                         const Eigen::MatrixXd& position_probs);

/// Literal quadruple sum, O(d^4); oracle for the residue-class form.
double fidelity_f2_lower_literal(const Eigen::MatrixXd& momentum_probs,
                                 const Eigen::MatrixXd& position_probs);

/// 1 + max{k in [0, d-1] : f_tilde > k/d}.
int certify_dimension(double f_tilde, int d);

CertificationResult certify(const CorrelationMatrix& momentum,
                            const CorrelationMatrix& position);

/// B_k = k / d, the Schmidt-number-k fidelity bound.
inline double fidelity_bound(int k, int d) {
    return static_cast<double>(k) / static_cast<double>(d);
}

}  // namespace hyperent
