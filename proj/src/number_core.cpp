#include "cyclo/number_core.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>

namespace cyclo {

Int factorization_value(const Factorization& f) {
    Int v = 1;
    for (const auto& pp : f)
        for (unsigned i = 0; i < pp.e; i++) v *= pp.p;
    return v;
}

void factorization_lcm_into(Factorization& f, const Factorization& g) {
    for (const auto& pp : g) {
        bool found = false;
        for (auto& own : f) {
            if (own.p == pp.p) {
                own.e = std::max(own.e, pp.e);
                found = true;
                break;
            }
        }
        if (!found) f.push_back(pp);
    }
}

std::vector<Int> divisors_sorted(const Factorization& f) {
    std::vector<Int> divs{1};
    for (const auto& pp : f) {
        size_t base = divs.size();
        if (base * (pp.e + 1) > 1000000) throw std::runtime_error("divisor count too large");
        Int q = 1;
        for (unsigned i = 0; i < pp.e; i++) {
            q *= pp.p;
            for (size_t j = 0; j < base; j++) divs.push_back(divs[j] * q);
        }
    }
    std::sort(divs.begin(), divs.end());
    return divs;
}

const std::vector<uint32_t>& small_primes(uint32_t limit) {
    static std::mutex mu;
    static std::vector<uint32_t> primes;
    static uint32_t sieved_to = 0;
    std::lock_guard lock(mu);
    if (limit > (1u << 26)) throw std::invalid_argument("sieve limit too large");
    if (limit > sieved_to) {
        uint32_t target = std::max(limit, 1u << 20);
        std::vector<bool> comp(target, false);
        primes.clear();
        for (uint32_t i = 2; i < target; i++) {
            if (comp[i]) continue;
            primes.push_back(i);
            for (uint64_t j = uint64_t(i) * i; j < target; j += i) comp[j] = true;
        }
        sieved_to = target;
    }
    return primes;
}

bool is_small_prime(uint64_t q) {
    if (q < 2) return false;
    for (uint64_t d = 2; d * d <= q; d++)
        if (q % d == 0) return false;
    return true;
}

FactorResult factor_bounded(const Int& x, uint32_t bound) {
    if (x <= 1) throw std::invalid_argument("factor_bounded requires x > 1");
    FactorResult res;
    res.cofactor = x;
    if (bound < 2) return res;
    const auto& primes = small_primes(bound);
    for (uint32_t p : primes) {
        if (p >= bound) break;
        if (res.cofactor == 1) break;
        if (Int(p) * p > res.cofactor) break;  // cofactor is prime
        if (mpz_divisible_ui_p(res.cofactor.get_mpz_t(), p)) {
            unsigned e = 0;
            while (mpz_divisible_ui_p(res.cofactor.get_mpz_t(), p)) {
                res.cofactor /= p;
                e++;
            }
            res.factors.push_back({Int(p), e});
        }
    }
    if (res.cofactor > 1 && res.cofactor < bound) {
        res.factors.push_back({res.cofactor, 1});
        res.cofactor = 1;
    }
    return res;
}

Factorization factor_completely(const Int& x, uint32_t bound) {
    if (x == 1) return {};
    Int root = isqrt(x) + 2;
    uint32_t limit = bound;
    if (root < Int(bound)) limit = uint32_t(root.get_ui());
    auto r = factor_bounded(x, limit);
    if (r.cofactor > 1) {
        // A leftover cofactor below limit^2 is prime by construction.
        if (r.cofactor < Int(limit) * limit) {
            r.factors.push_back({r.cofactor, 1});
        } else {
            throw std::runtime_error("factor_completely: unfactored cofactor");
        }
    }
    std::sort(r.factors.begin(), r.factors.end(),
              [](const PrimePower& a, const PrimePower& b) { return a.p < b.p; });
    return r.factors;
}

unsigned p_valuation(const Int& x, const Int& p) {
    if (x == 0) throw std::invalid_argument("p_valuation of zero");
    Int y = abs(x);
    unsigned v = 0;
    while (mpz_divisible_p(y.get_mpz_t(), p.get_mpz_t())) {
        y /= p;
        v++;
    }
    return v;
}

Int carmichael_lambda(const Factorization& s_factors) {
    Int l = 1;
    for (const auto& pp : s_factors) {
        Int part;
        if (pp.p == 2) {
            if (pp.e == 1) part = 1;
            else if (pp.e == 2) part = 2;
            else part = pow_ui(Int(2), pp.e - 2);
        } else {
            part = (pp.p - 1) * pow_ui(pp.p, pp.e - 1);
        }
        l = lcm(l, part);
    }
    return l;
}

Int mult_order_from_multiple(const Int& a, const Int& m, const Int& T, const Factorization& T_factors) {
    Int b = mod(a, m);
    if (gcd(b, m) != 1)
        throw std::invalid_argument("mult_order: gcd(a,m) = " + gcd(b, m).get_str());
    if (pow_mod(b, T, m) != 1) throw std::invalid_argument("mult_order: T is not a multiple of the order");
    Int e = T;
    for (const auto& pp : T_factors) {
        while (mpz_divisible_p(e.get_mpz_t(), pp.p.get_mpz_t())) {
            Int cand = e / pp.p;
            if (pow_mod(b, cand, m) == 1) e = cand;
            else break;
        }
    }
    return e;
}

Int mult_order(const Int& a, const Int& m) {
    if (m <= 1) throw std::invalid_argument("mult_order: modulus must exceed 1");
    auto mf = factor_completely(m);
    Int l = carmichael_lambda(mf);
    auto lf = factor_completely(l);
    return mult_order_from_multiple(a, m, l, lf);
}

unsigned saturation_index(const Int& n, const Int& p) {
    if (gcd(n, p) != 1) throw std::invalid_argument("saturation_index: p divides n");
    if (p == 2 && mod(n, 4) == 3) return p_valuation(n * n - 1, p);
    Int t = mult_order(n, p);  // t < p, which is small here
    Int pw;
    mpz_pow_ui(pw.get_mpz_t(), n.get_mpz_t(), t.get_ui());
    return p_valuation(pw - 1, p);
}

UnitOrFactor invert_or_factor(const Int& x, const Int& n) {
    UnitOrFactor r;
    Int y = mod(x, n);
    if (y == 0) {
        r.zero_divisor = true;
        return r;
    }
    Int g = gcd(y, n);
    if (g == 1) {
        Int inv;
        mpz_invert(inv.get_mpz_t(), y.get_mpz_t(), n.get_mpz_t());
        r.inverse = inv;
    } else {
        r.factor = g;
    }
    return r;
}

Int crt_pair(const Int& r1, const Int& m1, const Int& r2, const Int& m2) {
    Int inv;
    if (mpz_invert(inv.get_mpz_t(), m1.get_mpz_t(), m2.get_mpz_t()) == 0)
        throw std::invalid_argument("crt_pair: moduli not coprime");
    Int k = mod((r2 - r1) * inv, m2);
    return mod(r1 + m1 * k, m1 * m2);
}

Candidate screen(const Int& n, uint32_t bound) {
    Candidate c;
    c.n = n;
    if (bound < 2) return c;
    Int root = isqrt(n);
    const auto& primes = small_primes(bound);
    for (uint32_t p : primes) {
        if (p >= bound) break;
        if (Int(p) > root) {
            c.settled_prime = true;
            return c;
        }
        if (mpz_divisible_ui_p(n.get_mpz_t(), p) && n != p) {
            c.screen_factor = Int(p);
            return c;
        }
    }
    if (root < bound) c.settled_prime = true;
    return c;
}

}  // namespace cyclo
