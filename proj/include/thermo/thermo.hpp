// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "thermo/cocycle.hpp"
#include "thermo/common.hpp"
#include "thermo/ergodic.hpp"
#include "thermo/families.hpp"
#include "thermo/parallel.hpp"
#include "thermo/potential.hpp"
#include "thermo/pressure.hpp"
#include "thermo/projective.hpp"
#include "thermo/sft.hpp"
#include "thermo/transfer.hpp"
#include "thermo/typicality.hpp"
