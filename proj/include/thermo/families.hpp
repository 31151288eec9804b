// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "thermo/cocycle.hpp"
#include "thermo/common.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace thermo {

inline Matrix rotation(double turns) {
    double a = 2.0 * std::numbers::pi * turns;
    Matrix r(2, 2);
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return r;
}

inline Matrix hyperbolic(double lambda) {
    Matrix m(2, 2);
    m << lambda, 0.0, 0.0, 1.0 / lambda;
    return m;
}

inline Matrix swap2() {
    Matrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

// {diag(lambda, 1/lambda), rotation by 2 pi theta}
inline OneStepCocycle diagonal_rotation_cocycle(double lambda, double theta) {
    return OneStepCocycle({hyperbolic(lambda), rotation(theta)});
}

// {diag(lambda, 1/lambda), swap, rotation by 2 pi theta}
inline OneStepCocycle diagonal_swap_rotation_cocycle(double lambda, double theta) {
    return OneStepCocycle({hyperbolic(lambda), swap2(), rotation(theta)});
}

inline OneStepCocycle rotation_cocycle(const std::vector<double>& turns) {
    std::vector<Matrix> mats;
    for (double t : turns) mats.push_back(rotation(t));
    return OneStepCocycle(std::move(mats));
}

// Upper and lower unipotent shears.
inline OneStepCocycle shear_cocycle() {
    Matrix u(2, 2), l(2, 2);
    u << 1, 1, 0, 1;
    l << 1, 0, 1, 1;
    return OneStepCocycle({u, l});
}

} // namespace thermo
