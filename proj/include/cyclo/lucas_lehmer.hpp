#pragma once

#include <variant>

#include "cyclo/composite_witness.hpp"
#include "cyclo/cyclo_ring.hpp"
#include "cyclo/param_plan.hpp"

namespace cyclo {

struct Inconclusive {
    std::string diagnostic;
};

struct WorkExtension {
    unsigned long p = 2;
    unsigned k = 1;      // saturation index k_n(p)
    RingPtr ring;        // degree d: ord_p(n), or 2 when p = 2 and n = 3 mod 4
    CycloElem zeta_sat;  // exact order p^k
    RootOfUnityWitness witness;
};

struct LLTranscript {
    Int qprime;
    unsigned k = 1;            // saturation exponent; beta(q') = alpha^((n^t-1)/q'^k)
    std::vector<Int> coeffs;   // c_i with sum c_i n^i = (n^t - 1)/q'^k
    CycloElem beta_q;
};

struct LLWitness {
    Int s0 = 1;  // saturated order prod q'^k
    RingPtr ring;
    CycloElem alpha;
    std::vector<LLTranscript> transcripts;
    CycloElem beta;
    RootOfUnityWitness witness;
};

struct SamplerConfig {
    unsigned alpha_budget = 20;
    unsigned ring_budget = 60;
    unsigned x_budget = 40;
};

// Coefficients c_0..c_{t-1} with sum c_i n^i = (n^t - 1)/q exactly, from the
// base-q expansion of n (q need not be prime, only q | n^t - 1). The identity
// is asserted before returning.
std::vector<Int> fastpow_coeffs(const Int& n, const Int& q, unsigned long t);

using AlphaResult = std::variant<CycloElem, CompositeWitness, Inconclusive>;
// Random non-degenerate element passing the Frobenius identity
// (alpha^n = frobenius(alpha, n) in conductor rings, alpha^(n^d) = alpha in
// sampled rings). Frobenius failures are proofs of compositeness.
AlphaResult sample_alpha(const RingPtr& ring, Rng& rng, unsigned budget = 20);

using RingResult = std::variant<RingPtr, CompositeWitness, Inconclusive>;
// Monic degree-d polynomial ring over Z/nZ passing the Frobenius behavior
// filter: Y^(n^d) = Y and, for every prime e | d, Y^(n^(d/e)) - Y a unit.
// Degree 1 returns Z/nZ (conductor 1) immediately.
RingResult build_frobenius_ring(const Int& n, unsigned long d, Rng& rng, unsigned budget = 60);

using LLResult = std::variant<LLWitness, CompositeWitness, Inconclusive>;
// One deterministic attempt at the saturated-order construction with a given
// alpha (exposed for tests); nullopt beta entries signal a resample.
struct LLAttemptReject {
    std::string reason;
};
std::variant<LLWitness, CompositeWitness, LLAttemptReject> ll_attempt(
    const RingPtr& ring, const CycloElem& alpha, const std::vector<SPrimeEntry>& entries);

// Full Las Vegas loop: sample alpha, build beta(q') via fastpow transcripts,
// unit-check beta(q') - 1, combine, and backstop with verify_bb at order
// s0 = prod q'^(k_q'(n)).
LLResult ll_prove(const RingPtr& ring, const std::vector<SPrimeEntry>& entries, Rng& rng,
                  const SamplerConfig& cfg = {});

using WorkResult = std::variant<WorkExtension, CompositeWitness, Inconclusive>;
WorkResult build_work_extension(const Int& n, unsigned long p, Rng& rng,
                                const SamplerConfig& cfg = {});

}  // namespace cyclo
