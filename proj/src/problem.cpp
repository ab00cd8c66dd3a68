#include "blowup/problem.hpp"

#include <cstdio>

namespace blowup {

std::string problem_hash(const problem& p) {
    char buf[128];
    std::string canon = p.drift.render();
    canon += '|';
    canon += p.sigma.render();
    std::snprintf(buf, sizeof(buf), "|%.17g|%.17g|%.17g|%.17g", p.xi, p.ell, p.r, p.zeta);
    canon += buf;
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(canon)));
    return buf;
}

} // namespace blowup
