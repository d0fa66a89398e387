#pragma once

#include "dualstack/csv.hpp"
#include "dualstack/error.hpp"
#include "dualstack/fixture.hpp"
#include "dualstack/ip.hpp"
#include "dualstack/policy.hpp"
#include "dualstack/prefix_map.hpp"
#include "dualstack/race.hpp"
#include "dualstack/report.hpp"
#include "dualstack/report_io.hpp"
#include "dualstack/scenario.hpp"
#include "dualstack/selection.hpp"
#include "dualstack/sessions.hpp"
