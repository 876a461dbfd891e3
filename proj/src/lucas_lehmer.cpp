#include "cyclo/lucas_lehmer.hpp"

#include <stdexcept>

namespace cyclo {

namespace {

CompositeWitness factor_witness(const Int& n, const Int& f, const std::string& stage) {
    CompositeWitness w;
    w.kind = CompositeWitness::Kind::factor;
    w.n = n;
    w.factor = f;
    w.stage = stage;
    return w;
}

CompositeWitness fermat_witness(const RingPtr& ring, const CycloElem& alpha, unsigned long d,
                                const std::string& stage) {
    CompositeWitness w;
    w.kind = CompositeWitness::Kind::fermat;
    w.n = ring->n;
    w.ring_m = ring->m;
    w.ring_h = ring->h;
    w.elem = alpha.c;
    w.exponent = Int(d);
    w.stage = stage;
    return w;
}

CompositeWitness unit_witness(const RingPtr& ring, const CycloElem& x, const Int& f,
                              const std::string& stage) {
    CompositeWitness w;
    w.kind = CompositeWitness::Kind::unit;
    w.n = ring->n;
    w.ring_m = ring->m;
    w.ring_h = ring->h;
    w.elem = x.c;
    w.factor = f;
    w.stage = stage;
    return w;
}

CycloElem random_elem(const RingPtr& ring, Rng& rng) {
    CycloElem e{ring, std::vector<Int>(ring->d)};
    for (auto& c : e.c) c = rng.below(ring->n);
    return e;
}

size_t nonzero_count(const CycloElem& e) {
    size_t c = 0;
    for (const auto& x : e.c)
        if (x != 0) c++;
    return c;
}

}  // namespace

std::vector<Int> fastpow_coeffs(const Int& n, const Int& q, unsigned long t) {
    if (t == 0) throw std::invalid_argument("fastpow_coeffs: t must be positive");
    Int b = mod(n, q);
    if (b == 0) throw std::invalid_argument("fastpow_coeffs: q divides n");
    Int a = (n - b) / q;
    Int bt;
    mpz_pow_ui(bt.get_mpz_t(), b.get_mpz_t(), t);
    if (mod(bt - 1, q) != 0) throw std::invalid_argument("fastpow_coeffs: q does not divide n^t - 1");

    std::vector<Int> c(t);
    // c_0 = (b^t-1)/q + a*b^(t-1); c_j = a*b^(t-1-j) for j >= 1
    std::vector<Int> bpow(t);
    bpow[0] = 1;
    for (unsigned long i = 1; i < t; i++) bpow[i] = bpow[i - 1] * b;
    c[0] = (bt - 1) / q + a * bpow[t - 1];
    for (unsigned long j = 1; j < t; j++) c[j] = a * bpow[t - 1 - j];

    // runtime identity assertion
    Int nt;
    mpz_pow_ui(nt.get_mpz_t(), n.get_mpz_t(), t);
    Int sum = 0, npow = 1;
    for (unsigned long j = 0; j < t; j++) {
        sum += c[j] * npow;
        npow *= n;
    }
    if (sum * q != nt - 1) throw std::logic_error("fastpow_coeffs: expansion identity failed");
    return c;
}

AlphaResult sample_alpha(const RingPtr& ring, Rng& rng, unsigned budget) {
    const Int& n = ring->n;
    for (unsigned attempt = 0; attempt < budget; attempt++) {
        CycloElem alpha = random_elem(ring, rng);
        if (ring->d == 1) {
            const Int& v = alpha.c[0];
            if (v <= 1 || v == n - 1) continue;
        } else {
            if (nonzero_count(alpha) <= 1) continue;
        }
        auto inv = try_invert(alpha);
        if (inv.factor) return factor_witness(n, *inv.factor, "sample_alpha unit check");
        if (!inv.is_unit()) continue;

        if (ring->m > 0) {
            if (!(pow(alpha, n) == frobenius(alpha, n)))
                return fermat_witness(ring, alpha, 1, "sample_alpha Frobenius identity");
        } else {
            CycloElem orbit = alpha;
            for (size_t i = 0; i < ring->d; i++) orbit = pow(orbit, n);
            if (!(orbit == alpha))
                return fermat_witness(ring, alpha, ring->d, "sample_alpha Frobenius orbit");
        }
        return alpha;
    }
    return Inconclusive{"sample_alpha: budget exhausted"};
}

RingResult build_frobenius_ring(const Int& n, unsigned long d, Rng& rng, unsigned budget) {
    if (d == 1) return CycloRing::conductor(n, 1);
    auto dfactors = factor_completely(Int(d));
    for (unsigned attempt = 0; attempt < budget; attempt++) {
        std::vector<Int> h(d + 1);
        for (unsigned long i = 0; i < d; i++) h[i] = rng.below(n);
        h[d] = 1;
        RingPtr ring = CycloRing::custom(n, h);
        CycloElem y = elem_monomial(ring, 1);
        CycloElem x = y;
        bool rejected = false;
        for (unsigned long j = 1; j <= d && !rejected; j++) {
            x = pow(x, n);  // Y^(n^j)
            for (const auto& pp : dfactors) {
                if (Int(d) / pp.p == Int(j)) {
                    auto inv = try_invert(sub(x, y));
                    if (inv.factor) return factor_witness(n, *inv.factor, "ring filter unit check");
                    if (!inv.is_unit()) { rejected = true; break; }
                }
            }
        }
        if (rejected) continue;
        if (!(x == y)) continue;  // Y^(n^d) != Y: wrong splitting behavior, resample
        return ring;
    }
    return Inconclusive{"build_frobenius_ring: budget exhausted at degree " + std::to_string(d)};
}

std::variant<LLWitness, CompositeWitness, LLAttemptReject> ll_attempt(
    const RingPtr& ring, const CycloElem& alpha, const std::vector<SPrimeEntry>& entries) {
    const Int& n = ring->n;
    unsigned long t = ring->d;
    LLWitness w;
    w.ring = ring;
    w.alpha = alpha;
    w.beta = elem_one(ring);

    std::vector<Int> sigma_exp;  // n^i mod m for conductor rings
    if (ring->m > 0) {
        sigma_exp.resize(t);
        Int e = 1;
        for (unsigned long i = 0; i < t; i++) {
            sigma_exp[i] = e;
            e = mod(e * n, Int(ring->m));
        }
    }

    for (const auto& entry : entries) {
        Int Q = 1;
        for (unsigned i = 0; i < entry.sat_k; i++) Q *= entry.qprime;
        w.s0 *= Q;
        LLTranscript tr;
        tr.qprime = entry.qprime;
        tr.k = entry.sat_k;
        tr.coeffs = fastpow_coeffs(n, Q, t);

        CycloElem beta_q = elem_one(ring);
        if (ring->m > 0) {
            for (unsigned long i = 0; i < t; i++) {
                CycloElem term = pow(alpha, tr.coeffs[i]);
                if (i > 0) term = frobenius(term, sigma_exp[i]);
                beta_q = mul(beta_q, term);
            }
        } else {
            Int E = 0, npow = 1;
            for (unsigned long i = 0; i < t; i++) {
                E += tr.coeffs[i] * npow;
                npow *= n;
            }
            beta_q = pow(alpha, E);
        }
        auto inv = try_invert(sub(beta_q, elem_one(ring)));
        if (inv.factor) return unit_witness(ring, sub(beta_q, elem_one(ring)), *inv.factor, "ll unit check");
        if (!inv.is_unit())
            return LLAttemptReject{"beta(q') - 1 not a unit for q' = " + entry.qprime.get_str()};
        tr.beta_q = beta_q;
        w.beta = mul(w.beta, beta_q);
        w.transcripts.push_back(std::move(tr));
    }

    // backstop at the saturated order
    Factorization s0f;
    for (const auto& entry : entries) s0f.push_back({entry.qprime, entry.sat_k});
    Int t_bb = 1;
    if (w.s0 > 1) {
        Factorization Tf;
        for (const auto& entry : entries) {
            factorization_lcm_into(Tf, factor_completely(entry.order));
            if (entry.sat_k > 1) factorization_lcm_into(Tf, {{entry.qprime, entry.sat_k - 1}});
        }
        t_bb = mult_order_from_multiple(n, w.s0, factorization_value(Tf), Tf);
    }
    auto bb = verify_bb(w.beta, w.s0, t_bb, s0f);
    if (auto* fail = std::get_if<BBFailure>(&bb))
        return LLAttemptReject{"backstop: " + fail->detail};
    w.witness = std::get<RootOfUnityWitness>(bb);
    return w;
}

LLResult ll_prove(const RingPtr& ring, const std::vector<SPrimeEntry>& entries, Rng& rng,
                  const SamplerConfig& cfg) {
    std::string last;
    for (unsigned attempt = 0; attempt < cfg.alpha_budget; attempt++) {
        auto ar = sample_alpha(ring, rng, cfg.alpha_budget);
        if (auto* cw = std::get_if<CompositeWitness>(&ar)) return *cw;
        if (auto* inc = std::get_if<Inconclusive>(&ar)) return *inc;
        auto res = ll_attempt(ring, std::get<CycloElem>(ar), entries);
        if (auto* w = std::get_if<LLWitness>(&res)) return *w;
        if (auto* cw = std::get_if<CompositeWitness>(&res)) return *cw;
        last = std::get<LLAttemptReject>(res).reason;
    }
    return Inconclusive{"ll_prove: retry budget exhausted; last reject: " + last};
}

WorkResult build_work_extension(const Int& n, unsigned long p, Rng& rng,
                                const SamplerConfig& cfg) {
    if (gcd(n, Int(p)) != 1) {
        Int g = gcd(n, Int(p));
        if (g == n) return Inconclusive{"n equals work prime"};
        return factor_witness(n, g, "work extension gcd");
    }
    unsigned long d;
    if (p == 2) d = (mod(n, 4) == 1) ? 1 : 2;
    else d = mult_order(n, Int(p)).get_ui();
    unsigned k = saturation_index(n, Int(p));
    Int pk = pow_ui(Int(p), k);
    Int t_pk = mult_order(n, pk);

    auto ringres = build_frobenius_ring(n, d, rng, cfg.ring_budget);
    if (auto* cw = std::get_if<CompositeWitness>(&ringres)) return *cw;
    if (auto* inc = std::get_if<Inconclusive>(&ringres)) return *inc;
    RingPtr ring = std::get<RingPtr>(ringres);

    Int N;
    mpz_pow_ui(N.get_mpz_t(), n.get_mpz_t(), d);
    N -= 1;
    Int cofactor = N / pk;  // exact: k = v_p(n^d - 1) by the saturation cases

    std::string last = "no candidate found";
    for (unsigned attempt = 0; attempt < cfg.x_budget; attempt++) {
        CycloElem x = random_elem(ring, rng);
        if (x.is_zero()) continue;
        auto xv = try_invert(x);
        if (xv.factor) return factor_witness(n, *xv.factor, "work extension sample");
        if (!xv.is_unit()) continue;
        CycloElem zeta = pow(x, cofactor);
        // order chain: zeta^(p^j)
        std::vector<CycloElem> chain{zeta};
        for (unsigned j = 1; j <= k; j++) chain.push_back(pow(chain.back(), Int(p)));
        if (!(chain[k] == elem_one(ring)))
            return fermat_witness(ring, x, d, "work extension Fermat");
        // least j with zeta^(p^j) = 1
        unsigned least = k + 1;
        for (unsigned jj = 0; jj <= k; jj++) {
            if (chain[jj] == elem_one(ring)) { least = jj; break; }
        }
        if (least == 0) { last = "zeta = 1"; continue; }
        CycloElem w = chain[least - 1];
        auto wu = try_invert(sub(w, elem_one(ring)));
        if (wu.factor) return factor_witness(n, *wu.factor, "work extension order harvest");
        if (!wu.is_unit()) { last = "order-chain element not unit"; continue; }
        if (least < k) { last = "p-power depth " + std::to_string(least); continue; }
        auto bb = verify_bb(zeta, pk, t_pk, {{Int(p), k}});
        if (auto* fail = std::get_if<BBFailure>(&bb)) { last = fail->detail; continue; }
        WorkExtension we;
        we.p = p;
        we.k = k;
        we.ring = ring;
        we.zeta_sat = zeta;
        we.witness = std::get<RootOfUnityWitness>(bb);
        return we;
    }
    return Inconclusive{"build_work_extension(p=" + std::to_string(p) + "): " + last};
}

}  // namespace cyclo
