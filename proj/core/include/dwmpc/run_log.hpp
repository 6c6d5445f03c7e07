#pragma once

#include <filesystem>

#include "dwmpc/simulate.hpp"

namespace dwmpc {

/// Writes one run to a single log file: '#'-prefixed header lines (format
/// version, config hash, seed, outcome, window, per-vehicle metrics) followed
/// by CSV tick rows merged across vehicles in (time, vehicle) order. All
/// floats carry 17 significant digits, so identical runs produce
/// byte-identical files and metrics recompute exactly from the rows.
void write_run_log(const RunRecord& record, const std::filesystem::path& path);

/// Parses a run log back. Raises ParseError naming the file and row on any
/// corruption.
RunRecord read_run_log(const std::filesystem::path& path);

}  // namespace dwmpc
