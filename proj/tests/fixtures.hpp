#pragma once

#include <string>

#include "triquad/quadsys.hpp"

namespace triquad::testfix {

inline std::string data_path(const std::string& name) {
    return std::string(TRIQUAD_DATA_DIR) + "/" + name;
}

// k=10 appendix-scale system: Q1 = I, Q2 = diag(1..10), Q3 = tridiag(1,1,1)
inline const TripleSystem& sysA() {
    static const TripleSystem s = TripleSystem::load_file(data_path("sysA.json"));
    return s;
}

// k=4 diagonal system whose pencil determinant splits into four linear forms
inline const TripleSystem& sysB() {
    static const TripleSystem s = TripleSystem::load_file(data_path("sysB.json"));
    return s;
}

// small pinned k=4 system (not diagonal, not special): identity + diagonal +
// 0/1 tridiagonal; used where no certification is required
inline const TripleSystem& k4() {
    static const TripleSystem s = [] {
        std::array<std::vector<std::vector<i64>>, 3> M;
        M[0] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
        M[1] = {{1, 0, 0, 0}, {0, 2, 0, 0}, {0, 0, 3, 0}, {0, 0, 0, 4}};
        M[2] = {{0, 1, 0, 0}, {1, 0, 1, 0}, {0, 1, 0, 1}, {0, 0, 1, 0}};
        return TripleSystem::from_matrices(4, M);
    }();
    return s;
}

}  // namespace triquad::testfix
