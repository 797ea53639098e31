#pragma once

// One registered application: its AIR, trace table, periodic harness
// parameters and the curves the resource manager consults.

#include <string>

#include "relsim/air.hpp"
#include "relsim/rm.hpp"
#include "relsim/time.hpp"
#include "relsim/trace.hpp"

namespace relsim {

struct AppSpec {
    std::string app_id;
    air::AirGraph air;
    SimTime period = 0;
    TraceTable traces;
    Demand demand;
    ScalabilityCurve scalability;
    StandaloneLoadCurve standalone_load;
    SimTime first_request = 0;
    SimTime jitter_bound = 0;
};

} // namespace relsim
