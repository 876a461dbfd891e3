#pragma once

#include <cstdint>

#include "cyclo/certifier.hpp"

namespace cyclo {

struct ProveConfig {
    uint32_t screen_bound = 1000000;
    uint64_t seed = 0;
    bool seeded = false;  // false: seed from entropy
    PlannerConfig planner;
    SamplerConfig sampler;
    bool want_certificate = true;
    std::vector<Int> factored_part;  // claimed prime factors of n^t - 1
    unsigned recursion_depth = 0;    // internal: Pratt nesting level
};

struct StageTime {
    std::string stage;
    double seconds = 0;
};

struct Verdict {
    enum class Kind { prime, composite, inconclusive } kind = Kind::inconclusive;
    std::optional<CompositeWitness> witness;  // composite verdicts
    std::string certificate;                  // serialized certificate (prime verdicts)
    std::string diagnostics;
    std::vector<StageTime> timings;
    double total_seconds = 0;
};

struct DivisionPass {};
using DivisionResult = std::variant<DivisionPass, CompositeWitness>;
// Tests r_i = n^i rem S for i = 1..t_div-1 against divisibility; any hit is a
// factor of n. Requires S^2 > n.
DivisionResult final_division(const Int& n, const Int& S, const Int& t_div);

Verdict prove(const Int& n, const ProveConfig& cfg = {});

// Shared sum cache across prove() calls in one process (optional).
Verdict prove_with_context(const Int& n, const ProveConfig& cfg, EngineContext& ctx);

}  // namespace cyclo
