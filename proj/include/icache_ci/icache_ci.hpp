/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

#include "icache_ci/cache.hpp"
#include "icache_ci/ci.hpp"
#include "icache_ci/energy.hpp"
#include "icache_ci/error.hpp"
#include "icache_ci/harness.hpp"
#include "icache_ci/program.hpp"
#include "icache_ci/report.hpp"
#include "icache_ci/synth.hpp"
#include "icache_ci/units.hpp"
