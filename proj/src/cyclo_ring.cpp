#include "cyclo/cyclo_ring.hpp"

#include <cassert>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>

namespace cyclo {

namespace {

// ---- integer polynomial helpers (exact, for cyclotomic_poly) ----

// Exact division quotient of a by monic-ish b (b divides a exactly).
std::vector<Int> zpoly_divexact(std::vector<Int> a, const std::vector<Int>& b) {
    std::vector<Int> q(a.size() - b.size() + 1, 0);
    for (size_t i = q.size(); i-- > 0;) {
        Int coef = a[i + b.size() - 1] / b.back();
        q[i] = coef;
        if (coef != 0)
            for (size_t j = 0; j < b.size(); j++) a[i + j] -= coef * b[j];
    }
    for (const Int& r : a)
        if (r != 0) throw std::logic_error("zpoly_divexact: nonzero remainder");
    return q;
}

// ---- coefficient vectors over Z/nZ, ascending ----

void strip(std::vector<Int>& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

std::vector<Int> mod_all(const std::vector<Int>& a, const Int& n) {
    std::vector<Int> r(a.size());
    for (size_t i = 0; i < a.size(); i++) r[i] = mod(a[i], n);
    return r;
}

std::vector<Int> poly_mul_school(const std::vector<Int>& a, const std::vector<Int>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<Int> r(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); i++) {
        if (a[i] == 0) continue;
        for (size_t j = 0; j < b.size(); j++) r[i + j] += a[i] * b[j];
    }
    return r;
}

constexpr size_t kKaratsubaThreshold = 32;

std::vector<Int> poly_mul_raw(const std::vector<Int>& a, const std::vector<Int>& b) {
    size_t na = a.size(), nb = b.size();
    if (na == 0 || nb == 0) return {};
    if (std::min(na, nb) <= kKaratsubaThreshold) return poly_mul_school(a, b);
    size_t half = (std::max(na, nb) + 1) / 2;
    auto slice = [](const std::vector<Int>& v, size_t from, size_t to) {
        std::vector<Int> s;
        for (size_t i = from; i < to && i < v.size(); i++) s.push_back(v[i]);
        return s;
    };
    std::vector<Int> a0 = slice(a, 0, half), a1 = slice(a, half, na);
    std::vector<Int> b0 = slice(b, 0, half), b1 = slice(b, half, nb);
    auto z0 = poly_mul_raw(a0, b0);
    auto z2 = poly_mul_raw(a1, b1);
    std::vector<Int> sa(std::max(a0.size(), a1.size()), 0), sb(std::max(b0.size(), b1.size()), 0);
    for (size_t i = 0; i < sa.size(); i++) {
        if (i < a0.size()) sa[i] += a0[i];
        if (i < a1.size()) sa[i] += a1[i];
    }
    for (size_t i = 0; i < sb.size(); i++) {
        if (i < b0.size()) sb[i] += b0[i];
        if (i < b1.size()) sb[i] += b1[i];
    }
    auto z1 = poly_mul_raw(sa, sb);
    // z1 -= z0 + z2
    z1.resize(std::max({z1.size(), z0.size(), z2.size()}), 0);
    for (size_t i = 0; i < z0.size(); i++) z1[i] -= z0[i];
    for (size_t i = 0; i < z2.size(); i++) z1[i] -= z2[i];
    std::vector<Int> r(na + nb - 1, 0);
    for (size_t i = 0; i < z0.size(); i++)
        if (i < r.size()) r[i] += z0[i];
    for (size_t i = 0; i < z1.size(); i++)
        if (i + half < r.size()) r[i + half] += z1[i];
    for (size_t i = 0; i < z2.size(); i++)
        if (i + 2 * half < r.size()) r[i + 2 * half] += z2[i];
    return r;
}

// Remainder of a by monic h, coefficients mod n.
std::vector<Int> poly_rem_monic(std::vector<Int> a, const std::vector<Int>& h, const Int& n) {
    size_t dh = h.size() - 1;
    for (size_t i = 0; i < a.size(); i++) a[i] = mod(a[i], n);
    strip(a);
    while (a.size() > dh) {
        Int lead = a.back();
        size_t shift = a.size() - 1 - dh;
        if (lead != 0) {
            for (size_t j = 0; j < dh; j++) a[shift + j] = mod(a[shift + j] - lead * h[j], n);
        }
        a.pop_back();
        strip(a);
    }
    return a;
}

std::vector<Int> padded(const std::vector<Int>& a, size_t d) {
    std::vector<Int> r = a;
    r.resize(d, 0);
    return r;
}

void check_same_ring(const CycloElem& a, const CycloElem& b) {
    if (!a.ring || !b.ring || !a.ring->same_as(*b.ring))
        throw std::invalid_argument("ring mismatch");
}

}  // namespace

std::vector<Int> cyclotomic_poly(unsigned long m) {
    static std::mutex mu;
    static std::map<unsigned long, std::vector<Int>> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;

    std::function<std::vector<Int>(unsigned long)> build = [&](unsigned long k) -> std::vector<Int> {
        auto found = cache.find(k);
        if (found != cache.end()) return found->second;
        std::vector<Int> num(k + 1, 0);  // X^k - 1
        num[0] = -1;
        num[k] = 1;
        std::vector<Int> phi = num;
        for (unsigned long dd = 1; dd < k; dd++) {
            if (k % dd == 0) phi = zpoly_divexact(phi, build(dd));
        }
        cache[k] = phi;
        return phi;
    };
    return build(m);
}

RingPtr CycloRing::conductor(const Int& n, unsigned long m) {
    if (m == 0) throw std::invalid_argument("conductor ring needs m > 0");
    if (gcd(n, Int(m)) != 1) throw std::invalid_argument("gcd(n, m) > 1");
    auto phi = cyclotomic_poly(m);
    auto r = std::make_shared<CycloRing>();
    r->n = n;
    r->m = m;
    r->d = phi.size() - 1;
    r->h = mod_all(phi, n);
    return r;
}

RingPtr CycloRing::custom(const Int& n, std::vector<Int> h_monic) {
    strip(h_monic);
    if (h_monic.size() < 2) throw std::invalid_argument("polynomial must have degree >= 1");
    auto r = std::make_shared<CycloRing>();
    r->n = n;
    r->m = 0;
    r->d = h_monic.size() - 1;
    r->h = mod_all(h_monic, n);
    if (r->h.back() != 1) throw std::invalid_argument("polynomial must be monic");
    return r;
}

bool CycloElem::is_zero() const {
    for (const auto& x : c)
        if (x != 0) return false;
    return true;
}

bool CycloElem::is_constant() const {
    for (size_t i = 1; i < c.size(); i++)
        if (c[i] != 0) return false;
    return true;
}

CycloElem elem_scalar(const RingPtr& r, const Int& v) {
    CycloElem e{r, std::vector<Int>(r->d, 0)};
    e.c[0] = mod(v, r->n);
    return e;
}
CycloElem elem_zero(const RingPtr& r) { return elem_scalar(r, 0); }
CycloElem elem_one(const RingPtr& r) { return elem_scalar(r, 1); }

CycloElem elem_from_coeffs(const RingPtr& r, const std::vector<Int>& coeffs) {
    auto red = poly_rem_monic(coeffs, r->h, r->n);
    return CycloElem{r, padded(red, r->d)};
}

CycloElem elem_monomial(const RingPtr& r, unsigned long deg) {
    std::vector<Int> c(deg + 1, 0);
    c[deg] = 1;
    return elem_from_coeffs(r, c);
}

CycloElem add(const CycloElem& a, const CycloElem& b) {
    check_same_ring(a, b);
    CycloElem r{a.ring, std::vector<Int>(a.ring->d)};
    for (size_t i = 0; i < r.c.size(); i++) r.c[i] = mod(a.c[i] + b.c[i], a.ring->n);
    return r;
}

CycloElem sub(const CycloElem& a, const CycloElem& b) {
    check_same_ring(a, b);
    CycloElem r{a.ring, std::vector<Int>(a.ring->d)};
    for (size_t i = 0; i < r.c.size(); i++) r.c[i] = mod(a.c[i] - b.c[i], a.ring->n);
    return r;
}

CycloElem mul(const CycloElem& a, const CycloElem& b) {
    check_same_ring(a, b);
    auto prod = poly_mul_raw(a.c, b.c);
    auto red = poly_rem_monic(prod, a.ring->h, a.ring->n);
    return CycloElem{a.ring, padded(red, a.ring->d)};
}

CycloElem mul_scalar(const CycloElem& a, const Int& s) {
    CycloElem r{a.ring, std::vector<Int>(a.ring->d)};
    Int sm = mod(s, a.ring->n);
    for (size_t i = 0; i < r.c.size(); i++) r.c[i] = mod(a.c[i] * sm, a.ring->n);
    return r;
}

CycloElem pow(const CycloElem& a, const Int& e) {
    if (e < 0) throw std::invalid_argument("pow: negative exponent");
    CycloElem r = elem_one(a.ring);
    if (e == 0) return r;
    size_t bits = mpz_sizeinbase(e.get_mpz_t(), 2);
    for (size_t i = bits; i-- > 0;) {
        r = mul(r, r);
        if (mpz_tstbit(e.get_mpz_t(), i)) r = mul(r, a);
    }
    return r;
}

CycloElem frobenius(const CycloElem& a, const Int& e) {
    const auto& ring = a.ring;
    if (ring->m == 0) throw std::invalid_argument("frobenius needs a conductor ring");
    unsigned long em = mod(e, Int(ring->m)).get_ui();
    if (gcd(Int(em), Int(ring->m)) != 1) throw std::invalid_argument("gcd(e, m) > 1");
    std::vector<Int> out(ring->m, 0);
    for (size_t i = 0; i < a.c.size(); i++) {
        if (a.c[i] == 0) continue;
        size_t target = (i * em) % ring->m;
        out[target] = mod(out[target] + a.c[i], ring->n);
    }
    return elem_from_coeffs(ring, out);
}

ElemInvert try_invert(const CycloElem& a) {
    ElemInvert res;
    const auto& ring = a.ring;
    const Int& n = ring->n;
    if (a.is_zero()) {
        res.zero_divisor = true;
        return res;
    }
    // Extended Euclid: r0 = h, r1 = a; track s-coefficients against a only:
    // t0 = 0, t1 = 1 with invariant  t_i * a = r_i  (mod h, n).
    std::vector<Int> r0 = ring->h, r1 = a.c;
    strip(r1);
    std::vector<Int> t0, t1{1};
    while (true) {
        if (r1.empty()) {
            // gcd is r0
            if (r0.size() == 1) {
                auto u = invert_or_factor(r0[0], n);
                if (u.is_unit()) {
                    std::vector<Int> inv;
                    for (const Int& x : t0) inv.push_back(mod(x * *u.inverse, n));
                    res.inverse = CycloElem{ring, padded(poly_rem_monic(inv, ring->h, n), ring->d)};
                } else if (u.factor) {
                    res.factor = u.factor;
                } else {
                    res.zero_divisor = true;  // cannot happen: gcd constant 0 means a = 0
                }
            } else {
                res.not_unit = true;  // nonconstant gcd: zero divisor in every component
            }
            return res;
        }
        // divide r0 by r1
        Int lead = r1.back();
        auto u = invert_or_factor(lead, n);
        if (!u.is_unit()) {
            if (u.factor) res.factor = u.factor;
            else res.not_unit = true;  // unreachable: lead != 0 by strip
            return res;
        }
        const Int& linv = *u.inverse;
        std::vector<Int> q(r0.size() >= r1.size() ? r0.size() - r1.size() + 1 : 0, 0);
        std::vector<Int> rem = r0;
        while (rem.size() >= r1.size() && !rem.empty()) {
            Int coef = mod(rem.back() * linv, n);
            size_t shift = rem.size() - r1.size();
            q[shift] = coef;
            if (coef != 0)
                for (size_t j = 0; j < r1.size(); j++) rem[shift + j] = mod(rem[shift + j] - coef * r1[j], n);
            rem.pop_back();
            strip(rem);
        }
        // t2 = t0 - q*t1
        auto qt1 = poly_mul_raw(q, t1);
        std::vector<Int> t2 = padded(t0, std::max(t0.size(), qt1.size()));
        for (size_t i = 0; i < qt1.size(); i++) t2[i] = mod(t2[i] - qt1[i], n);
        for (auto& x : t2) x = mod(x, n);
        strip(t2);
        r0 = std::move(r1);
        r1 = std::move(rem);
        t0 = std::move(t1);
        t1 = std::move(t2);
    }
}

bool is_primitive_root(const CycloElem& z, const Int& s, const Factorization& s_factors) {
    if (s <= 0) throw std::invalid_argument("is_primitive_root: s must be positive");
    const auto& ring = z.ring;
    if (s == 1) return sub(z, elem_one(ring)).is_zero();  // Phi_1(z) = z - 1

    // Phi_s(z) = prod_{d | s} (z^d - 1)^{mu(s/d)}. Only squarefree quotients
    // contribute; collect numerator (mu = +1) and denominator (mu = -1)
    // products over subsets of the prime radical. Phi_s(z) = 0 iff the
    // numerator vanishes and the denominator is a unit; a non-unit
    // denominator already implies Phi_s(z) != 0.
    std::vector<Int> primes;
    for (const auto& pp : s_factors) primes.push_back(pp.p);
    CycloElem num = elem_one(ring), den = elem_one(ring);
    size_t subsets = size_t(1) << primes.size();
    for (size_t mask = 0; mask < subsets; mask++) {
        Int quot = 1;
        int bits = 0;
        for (size_t i = 0; i < primes.size(); i++)
            if (mask & (size_t(1) << i)) { quot *= primes[i]; bits++; }
        CycloElem term = sub(pow(z, s / quot), elem_one(ring));
        if (bits % 2 == 0) num = mul(num, term);
        else den = mul(den, term);
    }
    auto dinv = try_invert(den);
    if (!dinv.is_unit()) return false;
    return num.is_zero();
}

bool is_primitive_root(const CycloElem& z, const Int& s) {
    if (s == 1) return is_primitive_root(z, s, {});
    return is_primitive_root(z, s, factor_completely(s));
}

BBResult verify_bb(const CycloElem& z, const Int& s, const Int& t) {
    return verify_bb(z, s, t, s == 1 ? Factorization{} : factor_completely(s));
}

BBResult verify_bb(const CycloElem& z, const Int& s, const Int& t, const Factorization& s_factors) {
    const auto& ring = z.ring;
    if (!is_primitive_root(z, s, s_factors))
        return BBFailure{1, "Phi_s(zeta) != 0 for s=" + s.get_str()};

    // Psi(X) = prod_{i=1}^{t} (X - z^{n^i}); each orbit element is the n-th
    // power of the previous one.
    if (!mpz_fits_ulong_p(t.get_mpz_t())) return BBFailure{2, "orbit length too large"};
    unsigned long tu = t.get_ui();
    std::vector<CycloElem> psi{elem_one(ring)};  // coefficients of Psi, ascending; starts as 1
    CycloElem orbit = z;
    for (unsigned long i = 1; i <= tu; i++) {
        orbit = pow(orbit, ring->n);
        // psi *= (X - orbit)
        psi.push_back(elem_one(ring));
        for (size_t j = psi.size() - 1; j-- > 0;) {
            CycloElem shifted = (j > 0) ? psi[j - 1] : elem_zero(ring);
            psi[j] = sub(shifted, mul(psi[j], orbit));
        }
    }
    if (!(orbit == z))
        return BBFailure{2, "orbit does not close: zeta^(n^t) != zeta"};
    std::vector<Int> scalars;
    for (size_t j = 0; j < psi.size(); j++) {
        if (!psi[j].is_constant())
            return BBFailure{2, "nonconstant Psi coefficient at degree " + std::to_string(j)};
        scalars.push_back(psi[j].c[0]);
    }
    RootOfUnityWitness w;
    w.ring = ring;
    w.zeta = z;
    w.order = s;
    w.sigma_exponent = mod(ring->n, Int(std::max<unsigned long>(ring->m, 1)));
    w.psi = std::move(scalars);
    return w;
}

RootResult extract_root(const CycloElem& alpha, const Int& p, unsigned l,
                        const CycloElem& zeta_sat, unsigned k) {
    const auto& ring = alpha.ring;
    if (l > k) throw std::invalid_argument("extract_root: l > k");
    Int N;
    mpz_pow_ui(N.get_mpz_t(), ring->n.get_mpz_t(), ring->d);
    N -= 1;
    Int pk = pow_ui(p, k);
    Int pl = pow_ui(p, l);
    if (!mpz_divisible_p(N.get_mpz_t(), pk.get_mpz_t()))
        throw std::invalid_argument("extract_root: p^k does not divide n^d - 1");
    Int u = N / pk;

    // Precondition alpha^(N/p^l) = 1, checked via the gamma chain below.
    CycloElem gamma = pow(alpha, u);
    std::vector<CycloElem> chain{gamma};  // chain[j] = gamma^(p^j)
    for (unsigned j = 1; j <= k - l; j++) chain.push_back(pow(chain.back(), p));
    if (!(chain[k - l] == elem_one(ring)))
        return RootFailure{"not a p^l-th power"};

    // Digit table: zeta^(digit * p^(k-1)) for digit in [0, p).
    CycloElem zstep = pow(zeta_sat, pow_ui(p, k - 1));
    std::vector<CycloElem> table{elem_one(ring)};
    for (Int digit = 1; digit < p; digit++) table.push_back(mul(table.back(), zstep));

    Int nu = 0;
    for (unsigned i = 1; i <= k - l; i++) {
        // alpha^(u*p^(k-l-i)) should equal zeta^(nu_i * p^(k-i))
        Int pki = pow_ui(p, k - i);
        Int known = mod(nu * pki, pk);
        CycloElem target = chain[k - l - i];
        CycloElem cancel = pow(zeta_sat, mod(pk - known, pk));
        CycloElem rest = mul(target, cancel);
        bool found = false;
        for (size_t digit = 0; digit < table.size(); digit++) {
            if (rest == table[digit]) {
                nu += Int(digit) * pow_ui(p, i - 1);
                found = true;
                break;
            }
        }
        if (!found) return RootFailure{"digit match not found"};
    }

    Int uinv;
    mpz_invert(uinv.get_mpz_t(), u.get_mpz_t(), pk.get_mpz_t());
    Int uprime = mod(-uinv, pk);  // u * uprime = -1 mod p^k
    Int e = (1 + u * uprime) / pl;
    CycloElem beta = mul(pow(alpha, e), pow(zeta_sat, mod(pk - mod(uprime * nu, pk), pk)));
    if (!(pow(beta, pl) == alpha)) return RootFailure{"postcondition failed"};
    return beta;
}

}  // namespace cyclo
