#include "decoupler/decoupling_experiments.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace decoupler;
using namespace decoupler::testing;

TEST_SUITE("exact_decoder") {

TEST_CASE("product input is trivially decoupled and perfectly recovered") {
    RngStream rng(60, 0);
    const PureState r_part = random_pure(HilbertSpec({2}), rng);
    const PureState be_part = random_pure(HilbertSpec({3, 2}), rng);
    const PureState psi = tensor(r_part, be_part);
    const auto out = exact_decoder(psi);
    CHECK(out.decoupling_violation < 1e-12);
    CHECK(out.fidelity >= 1.0 - 1e-10);
}

TEST_CASE("unentangled environment leaves the R-B entanglement recoverable") {
    // R entangled with B, E in |0>: psi = (|00> + |11>)/sqrt(2) (x) |0>.
    Vector psi = Vector::Zero(8);
    psi(0) = psi(6) = 1.0 / std::sqrt(2.0); // (r b e) = (0 0 0), (1 1 0)
    const auto out = exact_decoder(make_pure(psi, HilbertSpec({2, 2, 2})));
    CHECK(out.decoupling_violation < 1e-12);
    CHECK(out.fidelity >= 1.0 - 1e-10);
    CHECK(std::abs(out.recovered.matrix.trace().real() - 1.0) < 1e-10);
}

TEST_CASE("normal-form constructions decode with unit fidelity") {
    for (int trial = 0; trial < 20; ++trial) {
        RngStream rng(61, static_cast<std::uint64_t>(trial));
        const std::int64_t d_r = 2 + static_cast<std::int64_t>(rng.uniform_below(2)); // 2..3
        const std::int64_t d_e = 1 + static_cast<std::int64_t>(rng.uniform_below(2)); // 1..2
        const std::int64_t d_b = d_r * d_e;
        const PureState psi = random_decoupled_state(d_r, d_b, d_e, rng);
        const auto out = exact_decoder(psi);
        CHECK(out.decoupling_violation < 1e-10);
        CHECK(out.fidelity >= 1.0 - 1e-10);
    }
}

TEST_CASE("non-decoupled input reports the exact violation norm") {
    // GHZ: rho_RE - rho_R x rho_E has eigenvalues (1/4, 1/4, -1/4, -1/4).
    Vector ghz = Vector::Zero(8);
    ghz(0) = ghz(7) = 1.0 / std::sqrt(2.0);
    const PureState psi = make_pure(ghz, HilbertSpec({2, 2, 2}));
    CHECK_THROWS_AS(exact_decoder(psi), DecouplingViolationError);
    try {
        exact_decoder(psi);
    } catch (const DecouplingViolationError& err) {
        CHECK(std::abs(err.violation - 1.0) < 1e-12);
    }
    // A loose tolerance admits the state; recovery is then imperfect.
    const auto sloppy = exact_decoder(psi, 1.5);
    CHECK(sloppy.fidelity < 1.0 - 1e-3);
}

TEST_CASE("decoder rejects malformed partitions") {
    RngStream rng(62, 0);
    const PureState two_factor = random_pure(HilbertSpec({2, 4}), rng);
    CHECK_THROWS_AS(exact_decoder(two_factor), std::invalid_argument);
    CHECK_THROWS_AS(random_decoupled_state(2, 3, 2, rng), std::invalid_argument); // d_b too small
}

} // TEST_SUITE
