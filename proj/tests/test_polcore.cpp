#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <complex>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "hyperent/polcore.hpp"

using namespace hyperent;
using namespace hyperent::testing;

namespace {

// Independent 2x2 Jones oracle using plain std::complex arithmetic,
// decoupled from the library's Eigen-based implementation.
struct J2 {
    std::complex<double> a, b, c, d;
    J2 mul(const J2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c,
                c * o.b + d * o.d};
    }
    J2 dagger() const {
        return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)};
    }
};

J2 rot(double t) { return {std::cos(t), -std::sin(t), std::sin(t), std::cos(t)}; }

J2 retarder(double theta, double delta) {
    J2 d{1.0, 0.0, 0.0, std::exp(std::complex<double>(0.0, delta))};
    return rot(theta).mul(d).mul(rot(-theta));
}

// Back-propagated projector oracle: Uq^dag Uh^dag |port>, canonical phase.
std::pair<std::complex<double>, std::complex<double>> oracle_projector(
    double h, double q, bool transmit) {
    J2 u = retarder(q, kPi / 2.0).dagger().mul(retarder(h, kPi).dagger());
    std::complex<double> v0 = transmit ? u.a : u.b;
    std::complex<double> v1 = transmit ? u.c : u.d;
    std::complex<double> lead = std::abs(v0) > 1e-12 ? v0 : v1;
    std::complex<double> phase = std::abs(lead) / lead;
    return {v0 * phase, v1 * phase};
}

void check_matches_oracle(double h, double q, PbsPort port) {
    PolarizationKet ket = projector_from_waveplates({h, q, port});
    auto [o0, o1] = oracle_projector(h, q, port == PbsPort::transmit);
    CHECK(std::abs(ket.amplitudes(0) - o0) < 1e-12);
    CHECK(std::abs(ket.amplitudes(1) - o1) < 1e-12);
}

}  // namespace

TEST_CASE("projector from identity waveplates is H") {
    PolarizationKet k = projector_from_waveplates({0.0, 0.0, PbsPort::transmit});
    CHECK(std::abs(k.amplitudes(0) - 1.0) < 1e-12);
    CHECK(std::abs(k.amplitudes(1)) < 1e-12);
}

TEST_CASE("projector with HWP at 45 degrees is V") {
    PolarizationKet k =
        projector_from_waveplates({kPi / 4.0, 0.0, PbsPort::transmit});
    CHECK(std::abs(k.amplitudes(0)) < 1e-12);
    CHECK(std::abs(k.amplitudes(1)) - 1.0 < 1e-12);
    CHECK(std::abs(std::abs(k.amplitudes(1)) - 1.0) < 1e-12);
}

TEST_CASE("projector with HWP at 22.5 degrees, QWP at 0 matches Jones oracle") {
    // Numeric Jones-product oracle value: (|H> - i|V>)/sqrt(2). A QWP at
    // zero contributes a relative quarter-wave phase even though its fast
    // axis is horizontal, so the result is circular, not diagonal.
    PolarizationKet k =
        projector_from_waveplates({kPi / 8.0, 0.0, PbsPort::transmit});
    CHECK(std::abs(k.amplitudes(0) - 1.0 / std::sqrt(2.0)) < 1e-12);
    CHECK(std::abs(k.amplitudes(1) - Complex(0.0, -1.0 / std::sqrt(2.0))) <
          1e-12);
    check_matches_oracle(kPi / 8.0, 0.0, PbsPort::transmit);
}

TEST_CASE("projector matches the Jones oracle across angles and ports") {
    for (double h : {0.0, 0.1, kPi / 8.0, -kPi / 4.0, 1.2})
        for (double q : {0.0, -kPi / 4.0, kPi / 4.0, 0.7})
            for (PbsPort port : {PbsPort::transmit, PbsPort::reflect})
                check_matches_oracle(h, q, port);
}

TEST_CASE("projectors are unit norm with canonical leading phase") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    for (int i = 0; i < 200; ++i) {
        PolarizationKet k = projector_from_waveplates(
            {ang(gen), ang(gen),
             i % 2 ? PbsPort::transmit : PbsPort::reflect});
        CHECK(std::abs(k.amplitudes.norm() - 1.0) < 1e-12);
        Complex lead = std::abs(k.amplitudes(0)) > 1e-12 ? k.amplitudes(0)
                                                         : k.amplitudes(1);
        CHECK(std::abs(std::imag(lead)) < 1e-12);
        CHECK(std::real(lead) > 0.0);
    }
}

TEST_CASE("Born probability on the maximally entangled state") {
    DensityMatrix2Q rho = density_from_ket(phi_plus());
    PolarizationKet h, v, d;
    h.amplitudes = Vector2c(1.0, 0.0);
    v.amplitudes = Vector2c(0.0, 1.0);
    d.amplitudes = Vector2c(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
    CHECK(born_probability_joint(rho, h, h) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(born_probability_joint(rho, h, v) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(born_probability_joint(rho, d, d) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("Born probability rejects invalid density matrices") {
    PolarizationKet h;
    DensityMatrix2Q bad_trace;
    bad_trace.elements = Matrix4c::Identity() * 0.3;
    CHECK_THROWS_AS(born_probability_joint(bad_trace, h, h),
                    std::invalid_argument);
    DensityMatrix2Q non_herm;
    non_herm.elements = Matrix4c::Identity() / 4.0;
    non_herm.elements(0, 1) = Complex(0.1, 0.0);
    CHECK_THROWS_AS(born_probability_joint(non_herm, h, h),
                    std::invalid_argument);
}

TEST_CASE("Born probabilities sum to one over a complete basis pair") {
    std::mt19937_64 gen(11);
    PolarizationKet h, v;
    h.amplitudes = Vector2c(1.0, 0.0);
    v.amplitudes = Vector2c(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        DensityMatrix2Q rho = random_state(gen);
        double sum = 0.0;
        for (const auto& s : {h, v})
            for (const auto& t : {h, v}) sum += born_probability_joint(rho, s, t);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("concurrence of reference states") {
    CHECK(concurrence(density_from_ket(phi_plus())) ==
          doctest::Approx(1.0).epsilon(1e-9));
    Vector4c hh = Vector4c::Zero();
    hh(0) = 1.0;
    CHECK(concurrence(density_from_ket(hh)) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(concurrence(werner(0.5)) == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("Werner concurrence sweep matches max{0,(3p-1)/2}") {
    for (int i = 0; i <= 10; ++i) {
        double p = 0.1 * i;
        double expected = std::max(0.0, (3.0 * p - 1.0) / 2.0);
        CHECK(std::abs(concurrence(werner(p)) - expected) < 1e-9);
    }
}

TEST_CASE("concurrence is invariant under local unitaries") {
    std::mt19937_64 gen(23);
    for (int i = 0; i < 500; ++i) {
        DensityMatrix2Q rho = random_state(gen);
        Matrix4c u = kron(random_unitary(gen), random_unitary(gen));
        DensityMatrix2Q rotated{u * rho.elements * u.adjoint()};
        rotated.elements = 0.5 * (rotated.elements + rotated.elements.adjoint())
                               .eval();
        CHECK(std::abs(concurrence(rho) - concurrence(rotated)) < 1e-9);
    }
}

TEST_CASE("entanglement of formation endpoints and reference values") {
    CHECK(entanglement_of_formation(1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(entanglement_of_formation(0.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::abs(entanglement_of_formation(0.8303) - 0.7626) < 5e-4);
    CHECK_THROWS_AS(entanglement_of_formation(-0.1), std::domain_error);
    CHECK_THROWS_AS(entanglement_of_formation(1.1), std::domain_error);
}

TEST_CASE("entanglement of formation is monotone in concurrence") {
    double prev = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        double e = entanglement_of_formation(i / 1000.0);
        CHECK(e >= prev - 1e-12);
        prev = e;
    }
}

TEST_CASE("biphoton phase of constructed states") {
    auto phase = [](double theta) {
        return biphoton_phase(density_from_ket(hh_vv_phase(theta)));
    };
    CHECK(phase(kPi / 2.0).value() == doctest::Approx(kPi / 2.0).epsilon(1e-12));
    CHECK(phase(0.0).value() == doctest::Approx(0.0).epsilon(1e-12));
    // The branch point is reported as the canonical representative -pi.
    CHECK(phase(kPi).value() == doctest::Approx(-kPi).epsilon(1e-12));
}

TEST_CASE("biphoton phase wraps correctly for 64 uniformly spaced angles") {
    for (int i = 0; i < 64; ++i) {
        double theta = -kPi + 2.0 * kPi * i / 64.0;
        auto ph = biphoton_phase(density_from_ket(hh_vv_phase(theta)));
        REQUIRE(ph.has_value());
        CHECK(std::abs(wrap_angle(*ph - theta)) < 1e-9);
    }
}

TEST_CASE("biphoton phase is undefined without HH-VV coherence") {
    Vector4c hh = Vector4c::Zero();
    hh(0) = 1.0;
    CHECK(!biphoton_phase(density_from_ket(hh)).has_value());
}

TEST_CASE("density-matrix validation diagnostics") {
    DensityMatrix2Q ok;  // identity / 4
    CHECK(validate_density_matrix(ok).ok());

    DensityMatrix2Q bad_trace;
    bad_trace.elements = Matrix4c::Identity() * 0.225;  // trace 0.9
    auto rep = validate_density_matrix(bad_trace);
    CHECK(!rep.trace_ok);
    CHECK(rep.hermitian_ok);

    // A mildly negative eigenvalue, as raw linear inversions produce.
    DensityMatrix2Q neg;
    neg.elements = Matrix4c::Zero();
    neg.elements(0, 0) = 1.05;
    neg.elements(3, 3) = -0.05;
    auto rep2 = validate_density_matrix(neg);
    CHECK(!rep2.psd_ok);
    CHECK(rep2.min_eigenvalue < -1e-10);
}
