// Copyright 2026 The Occlufuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <span>
#include <string>

#include "occlufuse/harness.hpp"

namespace occlufuse {

/// Parses a scenario from JSON text. Keys carry explicit units in their
/// names ("duration_s", "range_m", "omega_n_rad_s", ...); trajectory and
/// camera sections are required, everything else falls back to the
/// engine defaults. Throws ConfigError naming the offending section.
Scenario parse_scenario(const std::string& json_text);

/// Reads and parses a scenario file. Throws ConfigError on IO failure or
/// any schema violation.
Scenario load_scenario(const std::string& path);

/// Every built-in default, pretty-printed as JSON: the fusion tuning
/// (process and vision weights, haptic distance curve, filter corner and
/// damping, the unobservable-variance sentinel), the sensor calibration
/// table, and the scenario/sweep defaults.
std::string default_config_json();

/// Result table as JSON: two sections (haptic in range / out of range),
/// each holding one row per populated (distance, occlusion) cell in band
/// order.
std::string result_table_json(const ResultTable& table);

/// Result table as CSV, one row per populated cell, floats at 9
/// significant digits.
std::string result_table_csv(const ResultTable& table);

/// Long-format whitespace-separated plot data, one line per cell and
/// method (fused / vision / haptic), ready for gnuplot.
std::string result_plot_data(const ResultTable& table);

/// Single-run roll-up as JSON: overall RMSE per stream, modality validity
/// rates, mean occlusion, and the banded result table.
std::string run_summary_json(const Scenario& scenario,
                             std::span<const FrameRecord> records);

}  // namespace occlufuse
