#pragma once

#include <string>

#include "stereomix/metrics.hpp"

namespace smx {

// Flat key-value rendering plus a machine-readable JSON twin.
std::string report_text(const ErrorReport& r);
void write_report_text(const std::string& path, const ErrorReport& r);
void write_report_json(const std::string& path, const ErrorReport& r);

} // namespace smx
