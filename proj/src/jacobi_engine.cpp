#include "cyclo/jacobi_engine.hpp"

#include <stdexcept>

namespace cyclo {

const Character& EngineContext::character(const CharPair& pair) {
    auto it = chars_.find(pair);
    if (it != chars_.end()) return it->second;
    auto base = base_by_q_.find(pair.q);
    if (base == base_by_q_.end()) {
        Character built = build_character(pair, table_bound_);
        base = base_by_q_.emplace(pair.q, std::move(built)).first;
    }
    Character chi = base->second;  // shares g and dlog; order comes from pair
    chi.pair = pair;
    return chars_.emplace(pair, std::move(chi)).first->second;
}

const CycloInt& EngineContext::jsum(const CharPair& pair, unsigned long a) {
    return table_.sum(character(pair), a);
}

CycloInt EngineContext::Jnu(const CharPair& pair, unsigned long nu) {
    return multiple_jacobi_from(pair, nu, [&](unsigned long a) { return jsum(pair, a); });
}

std::vector<CycloElem> root_powers(const CycloElem& zeta, unsigned long count) {
    std::vector<CycloElem> powers{elem_one(zeta.ring)};
    for (unsigned long i = 1; i < count; i++) powers.push_back(mul(powers.back(), zeta));
    return powers;
}

CycloElem embed_cyclo_int(const CycloInt& a, const std::vector<CycloElem>& zeta_powers) {
    const RingPtr& ring = zeta_powers[0].ring;
    CycloElem acc = elem_zero(ring);
    for (size_t i = 0; i < a.c.size(); i++) {
        if (a.c[i] == 0) continue;
        acc = add(acc, mul_scalar(zeta_powers[i], a.c[i]));
    }
    return acc;
}

namespace {

CompositeWitness identity_witness(const RingPtr& ring, const CycloElem& alpha_img,
                                  const CycloElem& beta_img, const Int& l,
                                  const CycloElem& zeta, unsigned long match_order,
                                  const std::string& stage) {
    CompositeWitness w;
    w.kind = CompositeWitness::Kind::identity;
    w.n = ring->n;
    w.ring_m = ring->m;
    w.ring_h = ring->h;
    w.elem = alpha_img.c;
    w.elem2 = beta_img.c;
    w.zeta = zeta.c;
    w.exponent = l;
    w.match_order = match_order;
    w.stage = stage;
    return w;
}

// index of x in the powers list, or npos
size_t match_power(const std::vector<CycloElem>& powers, const CycloElem& x) {
    for (size_t j = 0; j < powers.size(); j++)
        if (powers[j] == x) return j;
    return size_t(-1);
}

}  // namespace

PairOutcome check_pair(EngineContext& ctx, const CharPair& pair, const WorkExtension& work) {
    if (pair.k > work.k)
        throw std::invalid_argument("check_pair: pair order exceeds saturation (use amalgam ring)");
    const RingPtr& ring = work.ring;
    const Int& n = ring->n;
    unsigned long pk = pair.pk();

    CycloElem zeta_pk = pow(work.zeta_sat, pow_ui(Int(work.p), work.k - pair.k));
    auto powers = root_powers(zeta_pk, pk);

    unsigned long nu = mod(n, Int(pk)).get_ui();
    Int l = (n - nu) / pk;
    CycloElem alpha = embed_cyclo_int(ctx.Jnu(pair, pk), powers);
    CycloElem beta = embed_cyclo_int(ctx.Jnu(pair, nu), powers);

    CycloElem M = mul(pow(alpha, l), beta);
    size_t j = match_power(powers, M);
    if (j == size_t(-1))
        return identity_witness(ring, alpha, beta, l, zeta_pk, pk, "pair check (standard)");

    // M = eta^{-n}: eta = M^(-1/n) in exponents
    Int ninv;
    mpz_invert(ninv.get_mpz_t(), mod(n, Int(pk)).get_mpz_t(), Int(pk).get_mpz_t());
    unsigned long eta = mod(-Int(j) * ninv, Int(pk)).get_ui();
    // re-substitution: eta^{-n} must reproduce the matched power
    if (mod(-Int(eta) * n, Int(pk)).get_ui() != j)
        throw std::logic_error("pair check: eta re-substitution failed");

    PairResult r;
    r.pair = pair;
    r.eta = eta;
    r.mode = PairResult::Mode::standard;
    r.l = l;
    r.nu = nu;
    return r;
}

PairOutcome check_pair_fullpower(EngineContext& ctx, const CharPair& pair, const WorkExtension& work) {
    if (pair.k > work.k)
        throw std::invalid_argument("check_pair_fullpower: pair order exceeds saturation");
    const RingPtr& ring = work.ring;
    const Int& n = ring->n;
    unsigned long pk = pair.pk();
    Int t_p = mult_order(n, Int(pk));
    if (gcd(t_p, Int(pair.p)) != 1)
        throw std::invalid_argument("check_pair_fullpower: t_p not coprime to p");

    CycloElem zeta_pk = pow(work.zeta_sat, pow_ui(Int(work.p), work.k - pair.k));
    auto powers = root_powers(zeta_pk, pk);
    CycloElem alpha = embed_cyclo_int(ctx.Jnu(pair, pk), powers);

    Int nt;
    mpz_pow_ui(nt.get_mpz_t(), n.get_mpz_t(), t_p.get_ui());
    Int E = (nt - 1) / pk;
    CycloElem M = pow(alpha, E);
    size_t j = match_power(powers, M);
    if (j == size_t(-1))
        return identity_witness(ring, alpha, elem_one(ring), E, zeta_pk, pk, "pair check (fullpower)");

    // M = eta^{-t_p}
    Int tinv;
    mpz_invert(tinv.get_mpz_t(), mod(t_p, Int(pk)).get_mpz_t(), Int(pk).get_mpz_t());
    unsigned long eta = mod(-Int(j) * tinv, Int(pk)).get_ui();

    PairResult r;
    r.pair = pair;
    r.eta = eta;
    r.mode = PairResult::Mode::fullpower;
    r.l = E;
    r.nu = mod(n, Int(pk)).get_ui();
    return r;
}

AmalgamOutcome check_amalgam(EngineContext& ctx, const Amalgam& am, const Int& n) {
    unsigned long f = am.f;
    RingPtr ring = CycloRing::conductor(n, f);
    CycloElem zeta_f = elem_monomial(ring, 1);
    auto powers = root_powers(zeta_f, f);

    unsigned long nu = mod(n, Int(f)).get_ui();
    Int l = (n - nu) / f;

    CycloElem alpha = elem_one(ring), beta = elem_one(ring);
    for (const CharPair& pr : am.members) {
        unsigned long pk = pr.pk();
        unsigned long nu_p = nu % pk;
        unsigned long lambda_p = (nu - nu_p) / pk;
        // component root zeta_{p^k} = Y^(f/p^k): its powers are a stride of the table
        std::vector<CycloElem> comp_powers;
        comp_powers.reserve(pk);
        for (unsigned long i = 0; i < pk; i++) comp_powers.push_back(powers[(i * (f / pk)) % f]);
        CycloElem a_img = embed_cyclo_int(ctx.Jnu(pr, pk), comp_powers);
        CycloElem b_img = embed_cyclo_int(ctx.Jnu(pr, nu_p), comp_powers);
        alpha = mul(alpha, pow(a_img, Int(f / pk)));
        beta = mul(beta, mul(pow(a_img, Int(lambda_p)), b_img));
    }

    CycloElem M = mul(pow(alpha, l), beta);
    size_t j = match_power(powers, M);
    if (j == size_t(-1))
        return identity_witness(ring, alpha, beta, l, zeta_f, f, "amalgam check");

    Int ninv;
    mpz_invert(ninv.get_mpz_t(), mod(n, Int(f)).get_mpz_t(), Int(f).get_mpz_t());
    unsigned long eta_f = mod(-Int(j) * ninv, Int(f)).get_ui();

    // decompose eta_f into per-pair exponents: eta_f = sum (f/p^k) x_p mod f
    std::vector<PairResult> out;
    Int check_sum = 0;
    for (const CharPair& pr : am.members) {
        unsigned long pk = pr.pk();
        Int stride(f / pk);
        Int sinv;
        mpz_invert(sinv.get_mpz_t(), mod(stride, Int(pk)).get_mpz_t(), Int(pk).get_mpz_t());
        unsigned long x = mod(Int(eta_f) * sinv, Int(pk)).get_ui();
        check_sum += stride * x;
        PairResult r;
        r.pair = pr;
        r.eta = x;
        r.mode = PairResult::Mode::amalgam;
        r.l = l;
        r.nu = nu % pk;
        out.push_back(r);
    }
    if (mod(check_sum, Int(f)).get_ui() != eta_f)
        throw std::logic_error("amalgam: eta decomposition failed");
    return out;
}

ConcludeResult conclude(const TestPlan& plan, const std::vector<PairResult>& results,
                        const std::map<unsigned long, WorkExtension>& works,
                        const LLWitness* ll) {
    std::map<CharPair, bool> covered;
    for (const auto& r : results) {
        if (covered.count(r.pair)) return Inconclusive{"duplicate pair result"};
        covered[r.pair] = true;
    }
    for (const auto& pr : plan.P)
        if (!covered.count(pr))
            return Inconclusive{"missing pair result for (p^k,q) = (" + std::to_string(pr.pk()) +
                                "," + std::to_string(pr.q) + ")"};
    for (unsigned long p : plan.work_primes)
        if (!works.count(p)) return Inconclusive{"missing work extension for p = " + std::to_string(p)};
    ExtensionProof proof;
    proof.order = plan.S;
    proof.pair_results = results;
    if (plan.s1 > 1) {
        if (!ll) return Inconclusive{"missing Lucas-Lehmer part for s' > 1"};
        if (ll->s0 != plan.s1) return Inconclusive{"Lucas-Lehmer witness order mismatch"};
        proof.has_ll = true;
        proof.ll_order = ll->s0;
    }
    return proof;
}

}  // namespace cyclo
