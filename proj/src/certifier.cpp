#include "cyclo/certifier.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

#include "cyclo/sha256.hpp"

namespace cyclo {

// ---------------------------------------------------------------------------
// Composite witness replay
// ---------------------------------------------------------------------------

namespace {

RingPtr witness_ring(const CompositeWitness& w) {
    if (w.ring_m > 0) return CycloRing::conductor(w.n, w.ring_m);
    return CycloRing::custom(w.n, w.ring_h);
}

}  // namespace

std::string CompositeWitness::describe() const {
    switch (kind) {
        case Kind::factor: return "factor " + factor.get_str() + " [" + stage + "]";
        case Kind::fermat: return "Frobenius/Fermat failure [" + stage + "]";
        case Kind::unit: return "unit check surfaced factor " + factor.get_str() + " [" + stage + "]";
        case Kind::identity: return "character identity failure [" + stage + "]";
        case Kind::final_division:
            return "final division factor " + r_i.get_str() + " at index " + index.get_str();
    }
    return "?";
}

bool CompositeWitness::replay() const {
    switch (kind) {
        case Kind::factor:
            return factor > 1 && factor < n && mod(n, factor) == 0;
        case Kind::fermat: {
            auto ring = witness_ring(*this);
            CycloElem alpha{ring, elem_from_coeffs(ring, elem).c};
            if (ring->m > 0 && exponent == 1)
                return !(pow(alpha, n) == frobenius(alpha, n));
            CycloElem orbit = alpha;
            for (Int i = 0; i < exponent; i++) orbit = pow(orbit, n);
            return !(orbit == alpha);
        }
        case Kind::unit: {
            auto ring = witness_ring(*this);
            CycloElem x{ring, elem_from_coeffs(ring, elem).c};
            auto inv = try_invert(x);
            return inv.factor && *inv.factor == factor;
        }
        case Kind::identity: {
            auto ring = witness_ring(*this);
            CycloElem alpha{ring, elem_from_coeffs(ring, elem).c};
            CycloElem beta{ring, elem_from_coeffs(ring, elem2).c};
            CycloElem z{ring, elem_from_coeffs(ring, zeta).c};
            CycloElem M = mul(pow(alpha, exponent), beta);
            CycloElem power = elem_one(ring);
            for (unsigned long j = 0; j < match_order; j++) {
                if (power == M) return false;  // a match exists: failure does not reproduce
                power = mul(power, z);
            }
            return true;
        }
        case Kind::final_division: {
            if (!(r_i > 1 && r_i < n)) return false;
            if (mod(n, r_i) != 0) return false;
            return pow_mod(mod(n, S), index, S) == r_i;
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Witness generation
// ---------------------------------------------------------------------------

TwistExponent twist_exponent(const CharPair& pair, const Int& n) {
    if (pair.p == 2 && mod(n, 4) == 3)
        throw std::domain_error("certification unsupported for p = 2 with n = 3 mod 4");
    TwistExponent tw;
    tw.u = saturation_index(n, Int(pair.p));
    if (pair.k > tw.u)
        throw std::domain_error("certification unsupported for k > k_n(p)");
    Int pk(pair.pk());
    tw.t = mult_order(n, pk);
    if (gcd(tw.t, Int(pair.p)) != 1)
        throw std::domain_error("certification needs ord_{p^k}(n) coprime to p");
    tw.v = valuation_of_power_minus_one(n, tw.t, Int(pair.p));
    // w mod p^u from (n^t - 1)/p^v computed modulo p^(u+v)
    Int pu = pow_ui(Int(pair.p), tw.u);
    Int puv = pu * pow_ui(Int(pair.p), tw.v);
    Int A = mod(pow_mod(n, tw.t, puv) - 1, puv);
    Int w_mod = mod(A / pow_ui(Int(pair.p), tw.v), pu);
    Int winv;
    if (mpz_invert(winv.get_mpz_t(), w_mod.get_mpz_t(), pu.get_mpz_t()) == 0)
        throw std::logic_error("twist: odd part not invertible");
    tw.e = mod(tw.t * winv, pu);
    return tw;
}

WitnessOutcome make_witness(EngineContext& ctx, const CharPair& pair, unsigned long eta,
                            const WorkExtension& work) {
    const RingPtr& ring = work.ring;
    TwistExponent tw = twist_exponent(pair, ring->n);
    unsigned long pk = pair.pk();
    Int pu = pow_ui(Int(pair.p), work.k);

    CycloElem zeta_pk = pow(work.zeta_sat, pow_ui(Int(work.p), work.k - pair.k));
    auto powers = root_powers(zeta_pk, pk);
    CycloElem alpha = embed_cyclo_int(ctx.Jnu(pair, pk), powers);
    CycloElem twist = pow(work.zeta_sat, mod(Int(eta) * tw.e, pu));
    CycloElem A = mul(twist, alpha);

    auto root = extract_root(A, Int(pair.p), pair.k, work.zeta_sat, work.k);
    if (auto* fail = std::get_if<RootFailure>(&root)) {
        CompositeWitness w;
        w.kind = CompositeWitness::Kind::identity;
        w.n = ring->n;
        w.ring_m = ring->m;
        w.ring_h = ring->h;
        w.elem = A.c;
        w.elem2 = elem_one(ring).c;
        w.zeta = work.zeta_sat.c;
        Int N;
        mpz_pow_ui(N.get_mpz_t(), ring->n.get_mpz_t(), ring->d);
        w.exponent = (N - 1) / Int(pk);
        w.match_order = 1;  // A^((n^d-1)/p^k) must be exactly 1
        w.stage = "witness extraction: " + fail->reason;
        return w;
    }
    PairWitness wit;
    wit.pair = pair;
    wit.root_mode = true;
    wit.eta = eta;
    wit.e = tw.e;
    wit.beta = std::get<CycloElem>(root).c;
    return wit;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

std::string coeffs_hex(const std::vector<Int>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); i++) {
        if (i) out += " ";
        out += to_hex(v[i]);
    }
    return out;
}

std::vector<Int> parse_coeffs(std::istringstream& ls) {
    std::vector<Int> out;
    std::string tok;
    while (ls >> tok) out.push_back(from_hex(tok));
    return out;
}

void serialize_body(const Certificate& cert, std::ostringstream& out) {
    out << "cppcert 1\n";
    out << "N " << to_hex(cert.n) << "\n";
    if (cert.trial_only) {
        out << "[trial]\n";
        return;
    }
    const CertPlan& p = cert.plan;
    out << "[plan]\n";
    out << "t " << to_hex(p.t) << "\n";
    out << "s " << to_hex(p.s) << "\n";
    out << "sprime " << to_hex(p.s_prime) << "\n";
    out << "s1 " << to_hex(p.s1) << "\n";
    out << "S " << to_hex(p.S) << "\n";
    out << "tdiv " << to_hex(p.t_div) << "\n";
    {
        out << "Q";
        for (unsigned long q : p.Q) out << " " << to_hex(Int(q));
        out << "\n";
    }
    for (const CharPair& pr : p.P)
        out << "pair " << to_hex(Int(pr.p)) << " " << to_hex(Int(pr.k)) << " " << to_hex(Int(pr.q)) << "\n";
    for (const auto& am : p.amalgams) {
        out << "amalgam";
        for (unsigned long idx : am) out << " " << to_hex(Int(idx));
        out << "\n";
    }
    for (const auto& aux : p.aux)
        out << "aux " << to_hex(aux.qprime) << " " << to_hex(Int(aux.k)) << " " << to_hex(aux.order)
            << " " << (aux.trial ? "trial" : "sub") << "\n";
    for (const auto& w : cert.works) {
        out << "[work p=" << to_hex(Int(w.p)) << "]\n";
        out << "d " << to_hex(Int(w.d)) << "\n";
        out << "k " << to_hex(Int(w.k)) << "\n";
        out << "m " << to_hex(Int(w.ring_m)) << "\n";
        out << "h " << coeffs_hex(w.h) << "\n";
        out << "zeta " << coeffs_hex(w.zeta) << "\n";
    }
    if (cert.ll) {
        out << "[ll s0=" << to_hex(cert.ll->s0) << "]\n";
        out << "t " << to_hex(Int(cert.ll->t)) << "\n";
        out << "m " << to_hex(Int(cert.ll->ring_m)) << "\n";
        out << "h " << coeffs_hex(cert.ll->h) << "\n";
        out << "alpha " << coeffs_hex(cert.ll->alpha) << "\n";
        for (const auto& e : cert.ll->entries)
            out << "q " << to_hex(e.qprime) << " " << to_hex(Int(e.k)) << " : " << coeffs_hex(e.coeffs)
                << "\n";
    }
    for (const auto& j : cert.jacs) {
        out << "[jac p=" << to_hex(Int(j.pair.p)) << " k=" << to_hex(Int(j.pair.k))
            << " q=" << to_hex(Int(j.pair.q)) << " a=" << to_hex(Int(j.a)) << "]\n";
        out << "v " << coeffs_hex(j.value.c) << "\n";
    }
    for (const auto& w : cert.wits) {
        out << "[wit p=" << to_hex(Int(w.pair.p)) << " k=" << to_hex(Int(w.pair.k))
            << " q=" << to_hex(Int(w.pair.q)) << "]\n";
        out << "mode " << (w.root_mode ? "root" : "replay") << "\n";
        out << "eta " << to_hex(Int(w.eta)) << "\n";
        if (w.root_mode) {
            out << "e " << to_hex(w.e) << "\n";
            out << "beta " << coeffs_hex(w.beta) << "\n";
        }
    }
    out << "[findiv]\n";
    out << "S " << to_hex(p.S) << "\n";
    out << "tdiv " << to_hex(p.t_div) << "\n";
    for (const auto& [q, text] : cert.subs) {
        out << "[sub q=" << q.get_str() << "]\n";
        std::istringstream sub(text);
        std::string line;
        while (std::getline(sub, line)) out << "  " << line << "\n";
    }
}

}  // namespace

std::string certificate_serialize(const Certificate& cert) {
    std::ostringstream out;
    serialize_body(cert, out);
    std::string body = out.str();
    return body + "sha256 " + sha256_hex(body) + "\n";
}

Certificate certificate_parse(const std::string& text) {
    size_t digest_pos = text.rfind("sha256 ");
    if (digest_pos == std::string::npos || digest_pos == 0 || text[digest_pos - 1] != '\n')
        throw std::runtime_error("certificate: missing checksum line");
    std::string body = text.substr(0, digest_pos);
    std::string digest_line = text.substr(digest_pos);
    if (digest_line.size() < 7 + 64) throw std::runtime_error("certificate: malformed checksum");
    if (digest_line.substr(7, 64) != sha256_hex(body))
        throw std::runtime_error("certificate: checksum mismatch");
    std::string tail = digest_line.substr(71);
    if (tail != "\n" && !tail.empty()) throw std::runtime_error("certificate: trailing data");

    std::vector<std::string> lines;
    {
        std::istringstream in(body);
        std::string line;
        while (std::getline(in, line)) lines.push_back(line);
    }
    size_t pos = 0;
    auto need = [&](const std::string& what) -> std::string {
        if (pos >= lines.size()) throw std::runtime_error("certificate: unexpected end (" + what + ")");
        return lines[pos++];
    };
    if (need("version") != "cppcert 1") throw std::runtime_error("certificate: unsupported version");
    Certificate cert;
    {
        std::string nline = need("N");
        if (nline.rfind("N ", 0) != 0) throw std::runtime_error("certificate: missing N line");
        cert.n = from_hex(nline.substr(2));
    }

    auto parse_tagged = [&](const std::string& line, const std::string& tag) -> std::istringstream {
        if (line.rfind(tag + " ", 0) != 0 && line != tag)
            throw std::runtime_error("certificate: expected '" + tag + "' line, got '" + line + "'");
        return std::istringstream(line.size() > tag.size() ? line.substr(tag.size() + 1) : "");
    };
    auto hex_field = [&](const std::string& line, const std::string& tag) -> Int {
        auto ls = parse_tagged(line, tag);
        std::string tok;
        if (!(ls >> tok)) throw std::runtime_error("certificate: empty '" + tag + "' line");
        return from_hex(tok);
    };

    std::string line = need("section");
    if (line == "[trial]") {
        cert.trial_only = true;
        if (pos != lines.size()) throw std::runtime_error("certificate: trailing data after [trial]");
        return cert;
    }
    if (line != "[plan]") throw std::runtime_error("certificate: expected [plan]");
    CertPlan& p = cert.plan;
    p.t = hex_field(need("t"), "t");
    p.s = hex_field(need("s"), "s");
    p.s_prime = hex_field(need("sprime"), "sprime");
    p.s1 = hex_field(need("s1"), "s1");
    p.S = hex_field(need("S"), "S");
    p.t_div = hex_field(need("tdiv"), "tdiv");
    {
        auto ls = parse_tagged(need("Q"), "Q");
        std::string tok;
        while (ls >> tok) p.Q.push_back(from_hex(tok).get_ui());
    }
    while (pos < lines.size() && lines[pos].rfind("pair ", 0) == 0) {
        auto ls = parse_tagged(lines[pos++], "pair");
        std::string a, b, c;
        ls >> a >> b >> c;
        p.P.push_back(CharPair{from_hex(a).get_ui(), unsigned(from_hex(b).get_ui()), from_hex(c).get_ui()});
    }
    while (pos < lines.size() && lines[pos].rfind("amalgam", 0) == 0) {
        auto ls = parse_tagged(lines[pos++], "amalgam");
        std::vector<unsigned long> idx;
        std::string tok;
        while (ls >> tok) idx.push_back(from_hex(tok).get_ui());
        p.amalgams.push_back(idx);
    }
    while (pos < lines.size() && lines[pos].rfind("aux ", 0) == 0) {
        auto ls = parse_tagged(lines[pos++], "aux");
        std::string a, b, c, d;
        ls >> a >> b >> c >> d;
        CertAux aux;
        aux.qprime = from_hex(a);
        aux.k = unsigned(from_hex(b).get_ui());
        aux.order = from_hex(c);
        if (d == "trial") aux.trial = true;
        else if (d == "sub") aux.trial = false;
        else throw std::runtime_error("certificate: bad aux marker");
        p.aux.push_back(aux);
    }

    while (pos < lines.size() && lines[pos].rfind("[work p=", 0) == 0) {
        std::string header = lines[pos++];
        CertWork w;
        w.p = from_hex(header.substr(8, header.size() - 9)).get_ui();
        w.d = hex_field(need("d"), "d").get_ui();
        w.k = unsigned(hex_field(need("k"), "k").get_ui());
        w.ring_m = hex_field(need("m"), "m").get_ui();
        {
            auto ls = parse_tagged(need("h"), "h");
            w.h = parse_coeffs(ls);
        }
        {
            auto ls = parse_tagged(need("zeta"), "zeta");
            w.zeta = parse_coeffs(ls);
        }
        cert.works.push_back(std::move(w));
    }

    if (pos < lines.size() && lines[pos].rfind("[ll s0=", 0) == 0) {
        std::string header = lines[pos++];
        CertLL ll;
        ll.s0 = from_hex(header.substr(7, header.size() - 8));
        ll.t = hex_field(need("t"), "t").get_ui();
        ll.ring_m = hex_field(need("m"), "m").get_ui();
        {
            auto ls = parse_tagged(need("h"), "h");
            ll.h = parse_coeffs(ls);
        }
        {
            auto ls = parse_tagged(need("alpha"), "alpha");
            ll.alpha = parse_coeffs(ls);
        }
        while (pos < lines.size() && lines[pos].rfind("q ", 0) == 0) {
            auto ls = parse_tagged(lines[pos++], "q");
            CertLL::Entry e;
            std::string a, b, colon;
            ls >> a >> b >> colon;
            if (colon != ":") throw std::runtime_error("certificate: malformed ll entry");
            e.qprime = from_hex(a);
            e.k = unsigned(from_hex(b).get_ui());
            e.coeffs = parse_coeffs(ls);
            ll.entries.push_back(std::move(e));
        }
        cert.ll = std::move(ll);
    }

    while (pos < lines.size() && lines[pos].rfind("[jac ", 0) == 0) {
        std::string header = lines[pos++];
        CertJac j;
        unsigned long pv = 0, kv = 0, qv = 0, av = 0;
        {
            std::istringstream hs(header.substr(5, header.size() - 6));
            std::string tok;
            while (hs >> tok) {
                auto eq = tok.find('=');
                if (eq == std::string::npos) throw std::runtime_error("certificate: bad jac header");
                std::string key = tok.substr(0, eq);
                unsigned long val = from_hex(tok.substr(eq + 1)).get_ui();
                if (key == "p") pv = val;
                else if (key == "k") kv = val;
                else if (key == "q") qv = val;
                else if (key == "a") av = val;
            }
        }
        j.pair = CharPair{pv, unsigned(kv), qv};
        j.a = av;
        {
            auto ls = parse_tagged(need("v"), "v");
            j.value.p = pv;
            j.value.k = unsigned(kv);
            j.value.m = j.pair.pk();
            j.value.c = parse_coeffs(ls);
            unsigned long phi = j.value.m / pv * (pv - 1);
            if (j.value.c.size() != phi) throw std::runtime_error("certificate: jac coefficient count");
        }
        cert.jacs.push_back(std::move(j));
    }

    while (pos < lines.size() && lines[pos].rfind("[wit ", 0) == 0) {
        std::string header = lines[pos++];
        PairWitness w;
        unsigned long pv = 0, kv = 0, qv = 0;
        {
            std::istringstream hs(header.substr(5, header.size() - 6));
            std::string tok;
            while (hs >> tok) {
                auto eq = tok.find('=');
                if (eq == std::string::npos) throw std::runtime_error("certificate: bad wit header");
                std::string key = tok.substr(0, eq);
                unsigned long val = from_hex(tok.substr(eq + 1)).get_ui();
                if (key == "p") pv = val;
                else if (key == "k") kv = val;
                else if (key == "q") qv = val;
            }
        }
        w.pair = CharPair{pv, unsigned(kv), qv};
        {
            std::string m = need("mode");
            if (m == "mode root") w.root_mode = true;
            else if (m == "mode replay") w.root_mode = false;
            else throw std::runtime_error("certificate: bad wit mode");
        }
        w.eta = hex_field(need("eta"), "eta").get_ui();
        if (w.root_mode) {
            w.e = hex_field(need("e"), "e");
            auto ls = parse_tagged(need("beta"), "beta");
            w.beta = parse_coeffs(ls);
        }
        cert.wits.push_back(std::move(w));
    }

    if (need("[findiv]") != "[findiv]") throw std::runtime_error("certificate: expected [findiv]");
    Int fS = hex_field(need("S"), "S");
    Int ftd = hex_field(need("tdiv"), "tdiv");
    if (fS != p.S || ftd != p.t_div)
        throw std::runtime_error("certificate: findiv parameters disagree with plan");

    while (pos < lines.size() && lines[pos].rfind("[sub q=", 0) == 0) {
        std::string header = lines[pos++];
        Int q(header.substr(7, header.size() - 8));
        std::string sub;
        while (pos < lines.size() && lines[pos].rfind("  ", 0) == 0) {
            sub += lines[pos].substr(2);
            sub += "\n";
            pos++;
        }
        cert.subs.emplace_back(q, sub);
    }
    if (pos != lines.size()) throw std::runtime_error("certificate: trailing data at '" + lines[pos] + "'");
    return cert;
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

namespace {

struct Reject {
    std::string path;
};

// dlog of x to the least generator of q, brute force (q is small by plan
// construction).
unsigned long small_dlog(unsigned long q, unsigned long g, unsigned long x) {
    unsigned long acc = 1;
    for (unsigned long y = 0; y < q - 1; y++) {
        if (acc == x) return y;
        acc = (acc * g) % q;
    }
    throw std::runtime_error("dlog: not in group");
}

unsigned long least_generator(unsigned long q) {
    auto f = factor_completely(Int(q - 1));
    for (unsigned long cand = 2; cand < q; cand++) {
        bool ok = true;
        for (const auto& pp : f)
            if (pow_mod(Int(cand), Int(q - 1) / pp.p, Int(q)) == 1) { ok = false; break; }
        if (ok) return cand;
    }
    throw std::logic_error("no generator");
}

bool trial_division_prime(const Int& n) {
    if (n < 2) return false;
    Int root = isqrt(n);
    if (root >= 1000000) return false;  // out of trial range
    if (n == 2) return true;
    if (mod(n, 2) == 0) return false;
    for (Int d = 3; d <= root; d += 2)
        if (mod(n, d) == 0) return false;
    return true;
}

}  // namespace

VerifyOutcome verify_certificate(const Certificate& cert) {
    VerifyOutcome out;
    try {
        const Int& n = cert.n;
        if (n < 2) throw Reject{"N: below 2"};

        if (cert.trial_only) {
            if (n > kTrialCertLimit) throw Reject{"trial: n exceeds trial certificate limit"};
            if (!trial_division_prime(n)) throw Reject{"trial: n has a small factor"};
            out.accepted = true;
            return out;
        }
        if (mod(n, 2) == 0) throw Reject{"N: even"};

        const CertPlan& plan = cert.plan;
        // ---- plan invariants ----
        if (plan.S != plan.s * plan.s1) throw Reject{"plan: S != s * s1"};
        if (plan.S * plan.S <= n) throw Reject{"plan: S^2 <= n"};
        if (gcd(n, plan.s * plan.t * plan.s_prime) != 1) throw Reject{"plan: gcd(n, s t s') != 1"};
        FT ft = f_of_t(plan.t);
        if (ft.f != plan.s) throw Reject{"plan: s != f(t)"};
        if (ft.qs != plan.Q) throw Reject{"plan: Q mismatch"};
        std::vector<CharPair> expect_P;
        for (unsigned long q : plan.Q) {
            if (!is_small_prime(q)) throw Reject{"plan: q not prime"};
            for (const auto& pp : factor_completely(Int(q - 1)))
                expect_P.push_back(CharPair{pp.p.get_ui(), pp.e, q});
        }
        {
            auto sorted_p = plan.P;
            std::sort(sorted_p.begin(), sorted_p.end());
            std::sort(expect_P.begin(), expect_P.end());
            if (sorted_p != expect_P) throw Reject{"plan: P mismatch"};
        }
        auto t_factors = factor_completely(plan.t);
        auto t_divisors = divisors_sorted(t_factors);

        // ---- auxiliary primes of the factored part ----
        Int sp = 1, s1 = 1;
        std::map<std::string, const std::string*> subs_by_q;
        for (const auto& [q, text] : cert.subs) subs_by_q[q.get_str()] = &text;
        for (const auto& aux : plan.aux) {
            std::string path = "aux q'=" + aux.qprime.get_str();
            if (gcd(aux.qprime, plan.s) != 1) throw Reject{path + ": divides s"};
            if (aux.trial) {
                if (aux.qprime >= Int(kTrialThreshold)) throw Reject{path + ": above trial threshold"};
                if (!trial_division_prime(aux.qprime)) throw Reject{path + ": not prime"};
            } else {
                auto it = subs_by_q.find(aux.qprime.get_str());
                if (it == subs_by_q.end()) throw Reject{path + ": missing sub-certificate"};
                auto subres = verify_certificate_text(*it->second);
                if (!subres.accepted) throw Reject{path + ": sub " + subres.reject_path};
                Certificate sub = certificate_parse(*it->second);
                if (sub.n != aux.qprime) throw Reject{path + ": sub-certificate is for a different number"};
            }
            // exact order and saturation exponent
            Int order = 0;
            for (const Int& d : t_divisors)
                if (pow_mod(n, d, aux.qprime) == 1) { order = d; break; }
            if (order == 0) throw Reject{path + ": does not divide n^t - 1"};
            if (order != aux.order) throw Reject{path + ": order mismatch"};
            unsigned kk = valuation_of_power_minus_one(n, order, aux.qprime);
            if (kk != aux.k) throw Reject{path + ": saturation exponent mismatch"};
            sp *= aux.qprime;
            for (unsigned i = 0; i < kk; i++) s1 *= aux.qprime;
        }
        if (sp != plan.s_prime) throw Reject{"plan: s' mismatch"};
        if (s1 != plan.s1) throw Reject{"plan: s1 mismatch"};
        if (cert.subs.size() != size_t(std::count_if(plan.aux.begin(), plan.aux.end(),
                                                     [](const CertAux& a) { return !a.trial; })))
            throw Reject{"plan: stray sub-certificates"};

        // ---- work extensions: one per prime p | t ----
        std::map<unsigned long, std::pair<RingPtr, CycloElem>> work_rings;
        std::map<unsigned long, unsigned> work_k;
        {
            std::vector<unsigned long> tprimes;
            for (const auto& pp : t_factors) tprimes.push_back(pp.p.get_ui());
            std::vector<unsigned long> wprimes;
            for (const auto& w : cert.works) wprimes.push_back(w.p);
            if (tprimes != wprimes) throw Reject{"work: prime coverage mismatch"};
        }
        for (const auto& w : cert.works) {
            std::string path = "work p=" + std::to_string(w.p);
            unsigned long d_expect;
            if (w.p == 2) d_expect = (mod(n, 4) == 1) ? 1 : 2;
            else d_expect = mult_order(n, Int(w.p)).get_ui();
            if (w.d != d_expect) throw Reject{path + ": degree mismatch"};
            if (w.k != saturation_index(n, Int(w.p))) throw Reject{path + ": saturation index mismatch"};
            RingPtr ring;
            if (w.ring_m > 0) {
                if (w.d != 1 || w.ring_m != 1) throw Reject{path + ": bad conductor ring"};
                ring = CycloRing::conductor(n, 1);
            } else {
                if (w.h.size() != w.d + 1) throw Reject{path + ": polynomial degree"};
                ring = CycloRing::custom(n, w.h);
            }
            if (w.zeta.size() != ring->d) throw Reject{path + ": zeta coefficient count"};
            CycloElem zeta{ring, w.zeta};
            for (const Int& c : zeta.c)
                if (c < 0 || c >= n) throw Reject{path + ": zeta coefficients out of range"};
            Int pk = pow_ui(Int(w.p), w.k);
            auto bb = verify_bb(zeta, pk, mult_order(n, pk), {{Int(w.p), w.k}});
            if (std::holds_alternative<BBFailure>(bb))
                throw Reject{path + ": " + std::get<BBFailure>(bb).detail};
            work_rings[w.p] = {ring, zeta};
            work_k[w.p] = w.k;
        }

        // ---- Lucas-Lehmer section ----
        if (plan.s1 > 1) {
            if (!cert.ll) throw Reject{"ll: section missing"};
        }
        if (cert.ll) {
            std::string path = "ll";
            const CertLL& ll = *cert.ll;
            if (ll.s0 != plan.s1) throw Reject{path + ": s0 != s1"};
            RingPtr ring;
            if (ll.ring_m > 0) {
                if (ll.t != 1 || ll.ring_m != 1) throw Reject{path + ": bad conductor ring"};
                ring = CycloRing::conductor(n, 1);
            } else {
                if (ll.h.size() != ll.t + 1) throw Reject{path + ": polynomial degree"};
                ring = CycloRing::custom(n, ll.h);
            }
            if (ll.alpha.size() != ring->d) throw Reject{path + ": alpha coefficient count"};
            CycloElem alpha{ring, ll.alpha};
            // Frobenius identity for alpha
            {
                CycloElem orbit = alpha;
                for (unsigned long i = 0; i < ll.t; i++) orbit = pow(orbit, n);
                if (!(orbit == alpha)) throw Reject{path + ": alpha Frobenius orbit"};
            }
            // per-prime transcripts
            std::map<std::string, const CertAux*> aux_by_q;
            for (const auto& a : plan.aux) aux_by_q[a.qprime.get_str()] = &a;
            if (ll.entries.size() != plan.aux.size()) throw Reject{path + ": entry coverage"};
            CycloElem beta = elem_one(ring);
            Int s0 = 1;
            for (const auto& e : ll.entries) {
                std::string epath = path + " q'=" + e.qprime.get_str();
                auto it = aux_by_q.find(e.qprime.get_str());
                if (it == aux_by_q.end()) throw Reject{epath + ": not in plan"};
                if (e.k != it->second->k) throw Reject{epath + ": exponent mismatch"};
                Int Q = 1;
                for (unsigned i = 0; i < e.k; i++) Q *= e.qprime;
                s0 *= Q;
                if (e.coeffs.size() != ll.t) throw Reject{epath + ": coefficient count"};
                // expansion identity sum c_i n^i = (n^t - 1)/Q
                Int nt;
                mpz_pow_ui(nt.get_mpz_t(), n.get_mpz_t(), ll.t);
                Int sum = 0, npow = 1;
                for (unsigned long i = 0; i < ll.t; i++) {
                    sum += e.coeffs[i] * npow;
                    npow *= n;
                }
                if (sum * Q != nt - 1) throw Reject{epath + ": expansion identity"};
                CycloElem beta_q = pow(alpha, sum);
                auto inv = try_invert(sub(beta_q, elem_one(ring)));
                if (!inv.is_unit()) throw Reject{epath + ": beta(q') - 1 not a unit"};
                beta = mul(beta, beta_q);
            }
            if (s0 != ll.s0) throw Reject{path + ": s0 product mismatch"};
            Factorization s0f;
            for (const auto& a : plan.aux) s0f.push_back({a.qprime, a.k});
            Factorization Tf;
            for (const auto& a : plan.aux) {
                factorization_lcm_into(Tf, factor_completely(a.order));
                if (a.k > 1) factorization_lcm_into(Tf, {{a.qprime, a.k - 1}});
            }
            Int t_bb = ll.s0 == 1 ? Int(1)
                                  : mult_order_from_multiple(n, ll.s0, factorization_value(Tf), Tf);
            if (t_bb != Int(ll.t)) throw Reject{path + ": ring degree != ord_{s0}(n)"};
            auto bb = verify_bb(beta, ll.s0, t_bb, s0f);
            if (std::holds_alternative<BBFailure>(bb))
                throw Reject{path + ": " + std::get<BBFailure>(bb).detail};
        }

        // ---- Jacobi sums ----
        std::map<JacobiKey, const CycloInt*> sums;
        for (const auto& j : cert.jacs) {
            std::string path = "jac p=" + std::to_string(j.pair.p) + " k=" + std::to_string(j.pair.k) +
                               " q=" + std::to_string(j.pair.q) + " a=" + std::to_string(j.a);
            if (!char_pair_valid(j.pair)) throw Reject{path + ": invalid pair"};
            auto cr = certify_jacobi_sum(j.value, j.pair, j.a);
            if (!cr.accepted) throw Reject{path + ": certification failed (" + cr.reason + ")"};
            sums[JacobiKey{j.pair.p, j.pair.k, j.pair.q, j.a}] = &j.value;
        }
        auto fetch_sum = [&](const CharPair& pr, unsigned long a) -> const CycloInt& {
            auto it = sums.find(JacobiKey{pr.p, pr.k, pr.q, a});
            if (it == sums.end())
                throw Reject{"wit: missing Jacobi sum a=" + std::to_string(a) + " for q=" +
                             std::to_string(pr.q)};
            return *it->second;
        };

        // ---- per-pair witnesses ----
        {
            std::vector<CharPair> wit_pairs;
            for (const auto& w : cert.wits) wit_pairs.push_back(w.pair);
            std::sort(wit_pairs.begin(), wit_pairs.end());
            auto sorted_p = plan.P;
            std::sort(sorted_p.begin(), sorted_p.end());
            if (wit_pairs != sorted_p) throw Reject{"wit: pair coverage mismatch"};
        }
        std::map<unsigned long, unsigned long> gen_by_q, dlog_n_by_q;
        for (const auto& w : cert.wits) {
            std::string path = "wit p=" + std::to_string(w.pair.p) + " k=" + std::to_string(w.pair.k) +
                               " q=" + std::to_string(w.pair.q);
            unsigned long pk = w.pair.pk();
            // canonical eta = chi(n) under the least-generator convention
            if (!gen_by_q.count(w.pair.q)) {
                unsigned long g = least_generator(w.pair.q);
                gen_by_q[w.pair.q] = g;
                dlog_n_by_q[w.pair.q] = small_dlog(w.pair.q, g, mod(n, Int(w.pair.q)).get_ui());
            }
            unsigned long eta_canon = dlog_n_by_q[w.pair.q] % pk;
            if (w.eta != eta_canon) throw Reject{path + ": eta mismatch"};

            // J_{p^k} and J_nu from the certified sums
            unsigned long nu = mod(n, Int(pk)).get_ui();
            CycloInt Jpk = multiple_jacobi_from(w.pair, pk,
                                                [&](unsigned long a) { return fetch_sum(w.pair, a); });
            CycloInt Jnu = multiple_jacobi_from(w.pair, nu,
                                                [&](unsigned long a) { return fetch_sum(w.pair, a); });

            if (w.root_mode) {
                unsigned u = saturation_index(n, Int(w.pair.p));
                if (w.pair.k > u) throw Reject{path + ": root mode with k > k_n(p)"};
                if (w.pair.p == 2 && mod(n, 4) == 3) throw Reject{path + ": root mode unsupported"};
                TwistExponent tw = twist_exponent(w.pair, n);
                if (tw.e != w.e) throw Reject{path + ": twist exponent mismatch"};
                auto& [ring, zeta_sat] = work_rings.at(w.pair.p);
                unsigned wk = work_k.at(w.pair.p);
                CycloElem zeta_pk = pow(zeta_sat, pow_ui(Int(w.pair.p), wk - w.pair.k));
                auto powers = root_powers(zeta_pk, pk);
                CycloElem alpha = embed_cyclo_int(Jpk, powers);
                Int pu = pow_ui(Int(w.pair.p), wk);
                CycloElem A = mul(pow(zeta_sat, mod(Int(w.eta) * tw.e, pu)), alpha);
                if (w.beta.size() != ring->d) throw Reject{path + ": beta coefficient count"};
                CycloElem beta{ring, w.beta};
                out.witness_exponent_bits = std::max(out.witness_exponent_bits,
                                                     mpz_sizeinbase(Int(pk).get_mpz_t(), 2));
                if (!(pow(beta, Int(pk)) == A)) throw Reject{path + ": beta^(p^k) != twist * alpha"};
            } else {
                // replay the pair identity in the formal ring
                if (!(w.pair.p == 2 && mod(n, 4) == 3) && w.pair.k <= saturation_index(n, Int(w.pair.p)))
                    throw Reject{path + ": replay mode where root mode is required"};
                RingPtr ring = CycloRing::conductor(n, pk);
                CycloElem zf = elem_monomial(ring, 1);
                auto powers = root_powers(zf, pk);
                CycloElem alpha = embed_cyclo_int(Jpk, powers);
                CycloElem beta = embed_cyclo_int(Jnu, powers);
                Int l = (n - nu) / pk;
                out.witness_exponent_bits = std::max(out.witness_exponent_bits,
                                                     mpz_sizeinbase(l.get_mpz_t(), 2));
                CycloElem M = mul(pow(alpha, l), beta);
                unsigned long expect = mod(-Int(w.eta) * n, Int(pk)).get_ui();
                if (!(M == powers[expect])) throw Reject{path + ": identity replay failed"};
            }
        }

        // ---- t_div and the final division replay ----
        {
            Factorization Tf;
            for (unsigned long q : plan.Q) factorization_lcm_into(Tf, factor_completely(Int(q - 1)));
            for (const auto& a : plan.aux) {
                factorization_lcm_into(Tf, factor_completely(a.order));
                if (a.k > 1) factorization_lcm_into(Tf, {{a.qprime, a.k - 1}});
            }
            Int td = mult_order_from_multiple(n, plan.S, factorization_value(Tf), Tf);
            if (td != plan.t_div) throw Reject{"findiv: t_div != ord_S(n)"};
            Int r = mod(n, plan.S);
            for (Int i = 1; i < plan.t_div; i++) {
                if (r > 1 && r < n && mod(n, r) == 0)
                    throw Reject{"findiv: factor " + r.get_str() + " at index " + i.get_str()};
                r = mod(r * n, plan.S);
            }
        }

        out.accepted = true;
        return out;
    } catch (const Reject& r) {
        out.accepted = false;
        out.reject_path = r.path;
        return out;
    } catch (const std::exception& e) {
        out.accepted = false;
        out.reject_path = std::string("verification error: ") + e.what();
        return out;
    }
}

VerifyOutcome verify_certificate_text(const std::string& text) {
    try {
        Certificate cert = certificate_parse(text);
        return verify_certificate(cert);
    } catch (const std::exception& e) {
        VerifyOutcome out;
        out.accepted = false;
        out.reject_path = e.what();
        return out;
    }
}

}  // namespace cyclo
