#include "decoupler/haar_sampling.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace decoupler {

namespace {

Matrix gate_matrix(const PassiveGate& gate, int n_modes) {
    Matrix g = Matrix::Identity(n_modes, n_modes);
    if (std::holds_alternative<BeamSplitter>(gate)) {
        const auto& bs = std::get<BeamSplitter>(gate);
        const double c = std::cos(bs.theta);
        const double s = std::sin(bs.theta);
        const Complex phase = std::polar(1.0, bs.phi);
        g(bs.mode_a, bs.mode_a) = phase * c;
        g(bs.mode_a, bs.mode_b) = -s;
        g(bs.mode_b, bs.mode_a) = phase * s;
        g(bs.mode_b, bs.mode_b) = c;
    } else {
        const auto& ps = std::get<PhaseShifter>(gate);
        g(ps.mode, ps.mode) = std::polar(1.0, ps.phi);
    }
    return g;
}

void check_gate(const PassiveGate& gate, int n_modes) {
    if (std::holds_alternative<BeamSplitter>(gate)) {
        const auto& bs = std::get<BeamSplitter>(gate);
        if (bs.mode_a < 0 || bs.mode_b >= n_modes || bs.mode_a >= bs.mode_b)
            throw std::invalid_argument("PassiveCircuit: beam splitter modes invalid");
    } else {
        const auto& ps = std::get<PhaseShifter>(gate);
        if (ps.mode < 0 || ps.mode >= n_modes)
            throw std::invalid_argument("PassiveCircuit: phase shifter mode invalid");
    }
}

} // namespace

Matrix mode_matrix(const PassiveCircuit& circuit) {
    if (circuit.n_modes < 1) throw std::invalid_argument("mode_matrix: empty circuit");
    Matrix m = Matrix::Identity(circuit.n_modes, circuit.n_modes);
    for (const auto& gate : circuit.gates) {
        check_gate(gate, circuit.n_modes);
        m = gate_matrix(gate, circuit.n_modes) * m;
    }
    return m;
}

PassiveCircuit clements_circuit(const Matrix& unitary) {
    const auto n = unitary.rows();
    if (n < 1 || unitary.cols() != n)
        throw std::invalid_argument("clements_circuit: matrix must be square");
    Matrix v = unitary;

    struct Rotation {
        int m;
        double theta;
        double phi;
    };
    std::vector<Rotation> right_ops; // V <- V T^dag, recorded in application order
    std::vector<Rotation> left_ops;  // V <- T V

    // Zig-zag elimination over the anti-diagonals; even sweeps act on columns
    // from the right, odd sweeps on rows from the left. Previously created
    // zeros are preserved by this ordering.
    for (int i = 0; i < n - 1; ++i) {
        if (i % 2 == 0) {
            for (int j = 0; j <= i; ++j) {
                const int row = static_cast<int>(n) - 1 - j;
                const int m = i - j; // columns m, m+1
                const Complex va = v(row, m);
                const Complex vb = v(row, m + 1);
                const double a = std::abs(va);
                const double b = std::abs(vb);
                if (a == 0.0) continue; // already zero
                const double phi = std::arg(va) - (b > 0.0 ? std::arg(vb) : 0.0);
                const double theta = std::atan2(a, b);
                const double c = std::cos(theta);
                const double s = std::sin(theta);
                const Complex ep = std::polar(1.0, -phi);
                for (Eigen::Index rr = 0; rr < n; ++rr) {
                    const Complex x = v(rr, m);
                    const Complex y = v(rr, m + 1);
                    v(rr, m) = x * (ep * c) - y * s;
                    v(rr, m + 1) = x * (ep * s) + y * c;
                }
                right_ops.push_back({m, theta, phi});
            }
        } else {
            for (int j = 0; j <= i; ++j) {
                const int row = static_cast<int>(n) - 1 - i + j;
                const int col = j;
                const int m = row - 1; // rows m, m+1
                const Complex va = v(m, col);
                const Complex vb = v(row, col);
                const double a = std::abs(va);
                const double b = std::abs(vb);
                if (b == 0.0) continue;
                const double phi = (b > 0.0 ? std::arg(vb) : 0.0) + std::numbers::pi -
                                   (a > 0.0 ? std::arg(va) : 0.0);
                const double theta = std::atan2(b, a);
                const double c = std::cos(theta);
                const double s = std::sin(theta);
                const Complex ep = std::polar(1.0, phi);
                for (Eigen::Index cc = 0; cc < n; ++cc) {
                    const Complex x = v(m, cc);
                    const Complex y = v(row, cc);
                    v(m, cc) = (ep * c) * x - s * y;
                    v(row, cc) = (ep * s) * x + c * y;
                }
                left_ops.push_back({m, theta, phi});
            }
        }
    }

    // U = T_l1^dag ... T_lk^dag . D . T_rq ... T_r1, so the circuit applies
    // the right rotations first, then the diagonal phases, then the inverted
    // left rotations (each T^dag = BS(-theta, 0) followed by PS(m, -phi)).
    PassiveCircuit circuit;
    circuit.n_modes = static_cast<int>(n);
    for (const auto& op : right_ops)
        circuit.gates.push_back(BeamSplitter{op.m, op.m + 1, op.theta, op.phi});
    for (int mode = 0; mode < n; ++mode) {
        const double phase = std::arg(v(mode, mode));
        circuit.gates.push_back(PhaseShifter{mode, phase});
    }
    for (auto it = left_ops.rbegin(); it != left_ops.rend(); ++it) {
        circuit.gates.push_back(BeamSplitter{it->m, it->m + 1, -it->theta, 0.0});
        circuit.gates.push_back(PhaseShifter{it->m, -it->phi});
    }
    return circuit;
}

PassiveCircuit random_passive_circuit(int n_modes, RngStream& rng) {
    if (n_modes < 1) throw std::invalid_argument("random_passive_circuit: n_modes must be >= 1");
    UnitarySample u = haar_unitary(n_modes, rng);
    return clements_circuit(u.matrix);
}

namespace {

// Factorials up to the register photon cap; desk-scale caps keep these exact.
std::vector<double> factorial_table(int n_max) {
    std::vector<double> f(static_cast<std::size_t>(n_max) + 1, 1.0);
    for (int n = 1; n <= n_max; ++n)
        f[static_cast<std::size_t>(n)] = f[static_cast<std::size_t>(n - 1)] * n;
    return f;
}

double binomial(const std::vector<double>& fact, int n, int k) {
    return fact[static_cast<std::size_t>(n)] /
           (fact[static_cast<std::size_t>(k)] * fact[static_cast<std::size_t>(n - k)]);
}

// Fock-sector matrix of a two-mode gate: W[mp][m] is the amplitude for m
// photons in mode a (of t total) to end up as mp photons in mode a.
Matrix two_mode_sector(const Eigen::Matrix2cd& b, int t, const std::vector<double>& fact) {
    Matrix w = Matrix::Zero(t + 1, t + 1);
    for (int m = 0; m <= t; ++m) {
        for (int mp = 0; mp <= t; ++mp) {
            Complex acc(0.0, 0.0);
            for (int p = std::max(0, mp - (t - m)); p <= std::min(m, mp); ++p) {
                const int q = mp - p;
                acc += binomial(fact, m, p) * binomial(fact, t - m, q) *
                       std::pow(b(0, 0), p) * std::pow(b(1, 0), m - p) * std::pow(b(0, 1), q) *
                       std::pow(b(1, 1), t - m - q);
            }
            const double norm = std::sqrt(fact[static_cast<std::size_t>(mp)] *
                                          fact[static_cast<std::size_t>(t - mp)] /
                                          (fact[static_cast<std::size_t>(m)] *
                                           fact[static_cast<std::size_t>(t - m)]));
            w(mp, m) = acc * norm;
        }
    }
    return w;
}

Vector apply_gate_fock(const PassiveGate& gate, const FockRegister& reg, const Vector& in,
                       const std::vector<double>& fact) {
    const auto d = reg.dim();
    Vector out = Vector::Zero(d);
    if (std::holds_alternative<PhaseShifter>(gate)) {
        const auto& ps = std::get<PhaseShifter>(gate);
        for (std::int64_t i = 0; i < d; ++i) {
            const int n = reg.occupation(i)[static_cast<std::size_t>(ps.mode)];
            out(i) = std::polar(1.0, n * ps.phi) * in(i);
        }
        return out;
    }
    const auto& bs = std::get<BeamSplitter>(gate);
    Eigen::Matrix2cd b;
    const double c = std::cos(bs.theta);
    const double s = std::sin(bs.theta);
    const Complex phase = std::polar(1.0, bs.phi);
    b << phase * c, -s, phase * s, c;

    std::vector<Matrix> sectors;
    sectors.reserve(static_cast<std::size_t>(reg.max_occupancy()) + 1);
    for (int t = 0; t <= reg.max_occupancy(); ++t) sectors.push_back(two_mode_sector(b, t, fact));

    OccupationString occ;
    for (std::int64_t i = 0; i < d; ++i) {
        occ = reg.occupation(i);
        const int mp = occ[static_cast<std::size_t>(bs.mode_a)];
        const int t = mp + occ[static_cast<std::size_t>(bs.mode_b)];
        const Matrix& w = sectors[static_cast<std::size_t>(t)];
        Complex acc(0.0, 0.0);
        for (int m = 0; m <= t; ++m) {
            occ[static_cast<std::size_t>(bs.mode_a)] = m;
            occ[static_cast<std::size_t>(bs.mode_b)] = t - m;
            acc += w(mp, m) * in(reg.index_of(occ));
        }
        out(i) = acc;
    }
    return out;
}

} // namespace

Vector apply_passive_to_fock(const PassiveCircuit& circuit, const FockRegister& reg,
                             Vector amplitudes) {
    if (circuit.n_modes != reg.n_modes())
        throw std::invalid_argument("apply_passive_to_fock: circuit/register mode-count mismatch");
    if (reg.truncation().kind != Truncation::Kind::TotalPhoton)
        throw std::invalid_argument(
            "apply_passive_to_fock: register must use TotalPhoton truncation");
    if (amplitudes.size() != reg.dim())
        throw std::invalid_argument("apply_passive_to_fock: state size mismatch");
    const auto fact = factorial_table(reg.max_occupancy());
    for (const auto& gate : circuit.gates) {
        check_gate(gate, circuit.n_modes);
        amplitudes = apply_gate_fock(gate, reg, amplitudes, fact);
    }
    return amplitudes;
}

UnitarySample lift_passive_to_fock(const PassiveCircuit& circuit, const FockRegister& reg) {
    const auto d = reg.dim();
    Matrix u(d, d);
    for (std::int64_t col = 0; col < d; ++col) {
        Vector e = Vector::Zero(d);
        e(col) = 1.0;
        u.col(col) = apply_passive_to_fock(circuit, reg, std::move(e));
    }
    return UnitarySample{std::move(u), HilbertSpec({d}), std::nullopt};
}

} // namespace decoupler
