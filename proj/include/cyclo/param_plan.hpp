#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cyclo/char_sums.hpp"
#include "cyclo/number_core.hpp"

namespace cyclo {

struct Amalgam {
    std::vector<CharPair> members;  // pairwise distinct primes p
    unsigned long f = 1;            // prod p^k over members
    std::optional<CharPair> root;   // present when t(pair) | t(root) for all members
};

struct SPrimeEntry {
    Int qprime;      // odd prime, coprime to s
    Int order;       // ord_{q'}(n), a divisor of t
    unsigned sat_k;  // saturation exponent k_{q'}(n)
};

struct TestPlan {
    Int n;
    Int t;
    Factorization t_factors;
    Int s;                           // f(t) = prod of primes q with (q-1) | t
    std::vector<unsigned long> Q;    // primes q | s, ascending
    std::vector<CharPair> P;         // pairs (p^k, q), p^k || q-1
    std::vector<Amalgam> amalgams;   // partition of P
    std::vector<SPrimeEntry> s_prime_entries;
    Int s_prime = 1;                 // prod q'
    Int s1 = 1;                      // prod q'^{k_{q'}}
    Int S = 1;                       // s * s1
    Int t_div = 1;                   // ord_S(n)
    std::vector<unsigned long> work_primes;  // primes p | t, ascending
};

// Immediate outcome discovered during planning: a factor of n, or the fact
// that n coincides with one of the auxiliary primes (so n is prime).
struct PlanVerdict {
    bool n_is_prime = false;
    Int factor = 0;
    std::string note;
};
struct PlanFailure {
    std::string diagnostic;
};

struct PlannerConfig {
    unsigned long t_ceiling = 1000000;  // scan bound for select_t
    unsigned long phi_cap = 64;         // max phi(f) per amalgam
    unsigned long table_bound = 1ul << 26;
};

// f(t) = prod of primes q with (q-1) | t, with the q list.
struct FT {
    Int f;
    std::vector<unsigned long> qs;
};
FT f_of_t(const Int& t);

// First t (ascending) with f(t)^2 > n; nullopt when the ceiling is exhausted.
std::optional<Int> select_t(const Int& n, const PlannerConfig& cfg = {});

// Q and P from a factored s = f(t).
struct PairSets {
    std::vector<unsigned long> Q;
    std::vector<CharPair> P;
};
std::variant<PairSets, PlanVerdict> build_pairs(const Int& n, const Int& t,
                                                const std::vector<unsigned long>& qs);

std::vector<Amalgam> build_amalgams(const std::vector<CharPair>& P, const Int& n,
                                    unsigned long phi_cap = 64);

// Validates claimed prime factors q' of n^t - 1 (coprime to s, pairwise
// distinct) and computes their orders and saturation exponents.
std::variant<std::vector<SPrimeEntry>, PlanVerdict, PlanFailure> ingest_factored_part(
    const Int& n, const Int& t, const Factorization& t_factors, const Int& s,
    const std::vector<Int>& claimed_primes);

// Assembles and validates a full plan; computes t_div = ord_S(n).
std::variant<TestPlan, PlanVerdict, PlanFailure> build_plan(
    const Int& n, const std::vector<Int>& factored_part = {}, const PlannerConfig& cfg = {});

// v_{q}(n^t - 1) computed without forming n^t.
unsigned valuation_of_power_minus_one(const Int& n, const Int& t, const Int& q);

unsigned long euler_phi(unsigned long m);

}  // namespace cyclo
