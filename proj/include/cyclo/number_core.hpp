#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cyclo/int_util.hpp"

namespace cyclo {

struct PrimePower {
    Int p;
    unsigned e = 1;
};
using Factorization = std::vector<PrimePower>;

Int factorization_value(const Factorization& f);
// Merge g into f, lcm-style on exponents (max per prime).
void factorization_lcm_into(Factorization& f, const Factorization& g);
// All divisors, ascending. Throws if the divisor count explodes (> 1e6).
std::vector<Int> divisors_sorted(const Factorization& f);

// Primes below limit, cached; limit <= 2^26.
const std::vector<uint32_t>& small_primes(uint32_t limit);
bool is_small_prime(uint64_t q);

struct FactorResult {
    Factorization factors;
    Int cofactor;  // 1 when fully factored
};
// Complete list of prime-power factors with primes below bound, plus the
// unfactored cofactor.
FactorResult factor_bounded(const Int& x, uint32_t bound);
// Full factorization; requires the second-largest prime factor below the bound
// (largest may exceed it if the remaining cofactor is a proved small prime).
// Throws when the cofactor resists.
Factorization factor_completely(const Int& x, uint32_t bound = 1u << 26);

// Largest v with p^v | x; x != 0.
unsigned p_valuation(const Int& x, const Int& p);

// Exponent of (Z/sZ)^* given the full factorization of s.
Int carmichael_lambda(const Factorization& s_factors);

// Least t >= 1 with a^t = 1 mod m; gcd(a, m) must be 1 (throws with the gcd
// in the message otherwise). Factors lambda(m) internally, so m must be
// fully factorable within the bound.
Int mult_order(const Int& a, const Int& m);
// Same, given a factored multiple T of the order (descends through T's primes).
Int mult_order_from_multiple(const Int& a, const Int& m, const Int& T, const Factorization& T_factors);

// v_2(n^2-1) if p = 2 and n = 3 mod 4, else v_p(n^t - 1) with t = ord_p(n).
unsigned saturation_index(const Int& n, const Int& p);

struct UnitOrFactor {
    std::optional<Int> inverse;  // engaged when x is a unit mod n
    std::optional<Int> factor;   // engaged when 1 < gcd(x,n) < n
    bool zero_divisor = false;   // x = 0 mod n
    bool is_unit() const { return inverse.has_value(); }
};
UnitOrFactor invert_or_factor(const Int& x, const Int& n);

// r mod m1*m2 with r = r1 mod m1, r = r2 mod m2; gcd(m1, m2) = 1.
Int crt_pair(const Int& r1, const Int& m1, const Int& r2, const Int& m2);

struct Candidate {
    Int n;
    std::optional<Int> screen_factor;  // a found factor, 1 < f < n
    bool settled_prime = false;        // survived division by every prime <= sqrt(n)
};
// Trial division by primes below bound (0 disables the screen entirely).
Candidate screen(const Int& n, uint32_t bound);

}  // namespace cyclo
