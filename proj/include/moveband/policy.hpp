#pragma once

#include "moveband/rng.hpp"

namespace moveband {

// Common bandit-policy contract: select then observe, once per round, both
// deterministic given the rng stream. One policy instance serves one run.
class BanditPolicy {
public:
    virtual ~BanditPolicy() = default;
    virtual int num_actions() const = 0;
    virtual int select(Rng& rng) = 0;
    virtual void observe(double loss, Rng& rng) = 0;
};

} // namespace moveband
