#pragma once

#include "decoupler/bosonic_fock.hpp"
#include "decoupler/operator_core.hpp"
#include "decoupler/rng.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace decoupler {

/// A sampled unitary, possibly acting nontrivially only on a subspace
/// spanned by `restriction` (basis indices), with identity on the complement.
struct UnitarySample {
    Matrix matrix;
    HilbertSpec spec;
    std::optional<std::vector<std::int64_t>> restriction;
};

/// Haar-distributed unitary: complex Ginibre followed by QR with the
/// R-diagonal phase correction Q diag(r_ii/|r_ii|). Plain QR is biased.
UnitarySample haar_unitary(std::int64_t d, RngStream& rng);

/// Haar unitary of size |basis| embedded on the listed basis indices,
/// identity elsewhere.
UnitarySample haar_unitary_on_subspace(std::span<const std::int64_t> basis,
                                       std::int64_t full_dim, RngStream& rng);

// ---- Passive linear optics ------------------------------------------------

/// Two-mode mixer on (mode_a, mode_b), mode_a < mode_b, with block
///   [ e^{i phi} cos theta   -sin theta ]
///   [ e^{i phi} sin theta    cos theta ]
struct BeamSplitter {
    int mode_a;
    int mode_b;
    double theta;
    double phi;
};

struct PhaseShifter {
    int mode;
    double phi;
};

using PassiveGate = std::variant<BeamSplitter, PhaseShifter>;

/// Gate list applied in order; the induced mode matrix is the reverse product
/// of the gate matrices.
struct PassiveCircuit {
    int n_modes = 0;
    std::vector<PassiveGate> gates;
};

/// N x N mode-space matrix induced by the circuit.
Matrix mode_matrix(const PassiveCircuit& circuit);

/// Exact mesh factorization of an arbitrary mode unitary into nearest-
/// neighbour beam splitters and phase shifters (rectangular elimination
/// order). mode_matrix(clements_circuit(u)) reproduces u.
PassiveCircuit clements_circuit(const Matrix& unitary);

/// Circuit whose mode matrix is Haar on U(N): Ginibre+QR sample factored
/// through clements_circuit. Random independent gates would not be Haar.
PassiveCircuit random_passive_circuit(int n_modes, RngStream& rng);

// ---- Exact lift onto photon-number sectors --------------------------------

/// Apply the circuit to a register state vector, gate by gate, exactly on
/// each fixed-total-photon sector. Requires TotalPhoton truncation (passive
/// gates conserve photon number, so there is no leakage).
Vector apply_passive_to_fock(const PassiveCircuit& circuit, const FockRegister& reg,
                             Vector amplitudes);

/// Dense block-diagonal unitary of the lifted circuit on the register basis.
UnitarySample lift_passive_to_fock(const PassiveCircuit& circuit, const FockRegister& reg);

} // namespace decoupler
