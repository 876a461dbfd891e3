#pragma once

#include <map>
#include <variant>

#include "cyclo/lucas_lehmer.hpp"

namespace cyclo {

struct PairResult {
    CharPair pair;
    unsigned long eta = 0;  // chi(n) as an exponent: eta_value = zeta_{p^k}^eta
    enum class Mode { standard, fullpower, amalgam } mode = Mode::standard;
    Int l;             // transcript: the exponent floor(n/p^k) (standard/amalgam: of f)
    unsigned long nu = 0;  // n rem p^k
};

struct ExtensionProof {
    Int order;  // S = s * s1: the proved cyclotomic-extension order
    std::vector<PairResult> pair_results;
    bool has_ll = false;
    Int ll_order = 1;
};

// Shared per-run state: characters and Jacobi sums, cached and reusable
// across candidates.
class EngineContext {
public:
    explicit EngineContext(unsigned long table_bound = 1ul << 26) : table_bound_(table_bound) {}
    const Character& character(const CharPair& pair);
    JacobiTable& table() { return table_; }
    const CycloInt& jsum(const CharPair& pair, unsigned long a);
    // J_nu(chi_pair) via cached sums.
    CycloInt Jnu(const CharPair& pair, unsigned long nu);

private:
    unsigned long table_bound_;
    JacobiTable table_;
    std::map<CharPair, Character> chars_;
    std::map<unsigned long, Character> base_by_q_;
};

// Powers zeta^0 .. zeta^(count-1).
std::vector<CycloElem> root_powers(const CycloElem& zeta, unsigned long count);
// sum a.c[i] * zeta_powers[i] in the ring of zeta.
CycloElem embed_cyclo_int(const CycloInt& a, const std::vector<CycloElem>& zeta_powers);

using PairOutcome = std::variant<PairResult, CompositeWitness>;

// Lemma-style check alpha^l * beta = eta^{-n} in the work ring, with
// alpha = J_{p^k}(chi), beta = J_nu(chi), nu = n rem p^k, l = floor(n/p^k).
// Requires pair.k <= work.k (the xi_{p^k} image must exist).
PairOutcome check_pair(EngineContext& ctx, const CharPair& pair, const WorkExtension& work);

// Iterated form alpha^((n^t_p - 1)/p^k) = chi(n)^{-t_p}, t_p = ord_{p^k}(n);
// requires gcd(t_p, p) = 1 (k <= k_n(p) and not the p = 2, n = 3 mod 4 case).
PairOutcome check_pair_fullpower(EngineContext& ctx, const CharPair& pair, const WorkExtension& work);

using AmalgamOutcome = std::variant<std::vector<PairResult>, CompositeWitness>;
// Merged check of Theorem-style amalgams in (Z/nZ)[Y]/Phi_f with
// zeta_{p^k} = Y^(f/p^k); eta decomposed by CRT into per-pair results.
AmalgamOutcome check_amalgam(EngineContext& ctx, const Amalgam& am, const Int& n);

using ConcludeResult = std::variant<ExtensionProof, Inconclusive>;
ConcludeResult conclude(const TestPlan& plan, const std::vector<PairResult>& results,
                        const std::map<unsigned long, WorkExtension>& works,
                        const LLWitness* ll);

}  // namespace cyclo
