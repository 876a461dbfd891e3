#pragma once

#include <string>
#include <vector>

#include "cyclo/int_util.hpp"

namespace cyclo {

// Concrete, replayable evidence that n is composite. The data is enough to
// re-run the single failed check in a few ring operations.
struct CompositeWitness {
    enum class Kind { factor, fermat, unit, identity, final_division };
    Kind kind = Kind::factor;
    Int n;
    std::string stage;  // which pipeline step produced the evidence

    Int factor;  // factor/unit kinds: a nontrivial divisor of n

    // ring spec for replay (fermat/unit/identity)
    unsigned long ring_m = 0;
    std::vector<Int> ring_h;

    std::vector<Int> elem;   // fermat: alpha; unit: the non-unit; identity: alpha image
    std::vector<Int> elem2;  // identity: beta image
    std::vector<Int> zeta;   // identity: the root-of-unity generating the match set
    Int exponent;            // fermat: orbit length d; identity: the exponent l
    unsigned long match_order = 0;  // identity: size of <zeta>

    Int S, index, r_i;  // final_division: n^index rem S = r_i, r_i | n

    std::string describe() const;
    // Re-runs the recorded check; true iff the failure reproduces.
    bool replay() const;
};

}  // namespace cyclo
