#include "hyperent/certify.hpp"

#include <cmath>
#include <stdexcept>

namespace hyperent {

Eigen::MatrixXd normalize_counts(const CorrelationMatrix& m) {
    if (m.total == 0)
        throw std::invalid_argument("normalize_counts: zero total count");
    Eigen::MatrixXd p(m.d, m.d);
    double total = static_cast<double>(m.total);
    for (int i = 0; i < m.d; ++i)
        for (int j = 0; j < m.d; ++j)
            p(i, j) = static_cast<double>(m.at(i, j)) / total;
    return p;
}

double fidelity_f1(const Eigen::MatrixXd& momentum_probs) {
    return momentum_probs.diagonal().sum();
}

namespace {

double gamma_penalty_fast(const Eigen::MatrixXd& probs) {
    const int d = static_cast<int>(probs.rows());
    Eigen::MatrixXd s = probs.cwiseSqrt();
    double penalty = 0.0;
    std::vector<double> cls(static_cast<size_t>(d));
    for (int r = 1; r < d; ++r) {
        double total = 0.0;
        for (int m = 0; m < d; ++m) {
            cls[static_cast<size_t>(m)] = s(m, (m - r + d) % d);
            total += cls[static_cast<size_t>(m)];
        }
        double sum = total * total;
        for (int m = 0; m < d; ++m) {
            double a = cls[static_cast<size_t>(m)];
            sum -= a * (a + cls[static_cast<size_t>((m + r) % d)]);
        }
        penalty += sum;
    }
    return penalty / d;
}

double gamma_penalty_literal(const Eigen::MatrixXd& probs) {
    const int d = static_cast<int>(probs.rows());
    double penalty = 0.0;
    for (int m = 0; m < d; ++m)
        for (int n = 0; n < d; ++n)
            for (int mp = 0; mp < d; ++mp)
                for (int np = 0; np < d; ++np) {
                    if (m == np || m == n || n == np || np == mp) continue;
                    if (((m - mp - n + np) % d + d) % d != 0) continue;
                    penalty +=
                        std::sqrt(probs(m, n) * probs(mp, np)) / d;
                }
    return penalty;
}

void check_dims(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
        throw std::invalid_argument("certify: dimension mismatch");
}

}  // namespace

double fidelity_f2_lower(const Eigen::MatrixXd& momentum_probs,
                         const Eigen::MatrixXd& position_probs) {
    check_dims(momentum_probs, position_probs);
    const int d = static_cast<int>(momentum_probs.rows());
    return position_probs.diagonal().sum() - 1.0 / d -
           gamma_penalty_fast(momentum_probs);
}

double fidelity_f2_lower_literal(const Eigen::MatrixXd& momentum_probs,
                                 const Eigen::MatrixXd& position_probs) {
    check_dims(momentum_probs, position_probs);
    const int d = static_cast<int>(momentum_probs.rows());
    return position_probs.diagonal().sum() - 1.0 / d -
           gamma_penalty_literal(momentum_probs);
}

int certify_dimension(double f_tilde, int d) {
    if (d < 1) throw std::invalid_argument("certify_dimension: d < 1");
    for (int k = d - 1; k >= 1; --k)
        if (f_tilde > fidelity_bound(k, d)) return k + 1;
    return 1;
}

CertificationResult certify(const CorrelationMatrix& momentum,
                            const CorrelationMatrix& position) {
    if (momentum.d != position.d)
        throw std::invalid_argument("certify: dimension mismatch");
    CertificationResult res;
    res.d = momentum.d;
    Eigen::MatrixXd pm = normalize_counts(momentum);
    Eigen::MatrixXd pp = normalize_counts(position);
    res.f1 = fidelity_f1(pm);
    res.gamma_penalty = gamma_penalty_fast(pm);
    res.f2_tilde = pp.diagonal().sum() - 1.0 / res.d - res.gamma_penalty;
    res.f_tilde = res.f1 + res.f2_tilde;
    res.certified_dim = certify_dimension(res.f_tilde, res.d);
    res.f_exceeds_one = res.f_tilde > 1.0;
    res.f1_weighted = res.f1 / res.d;
    res.f_tilde_weighted = res.f1_weighted + res.f2_tilde;
    res.certified_dim_weighted = certify_dimension(res.f_tilde_weighted, res.d);
    return res;
}

}  // namespace hyperent
