#pragma once

#include <string>
#include <vector>

#include "srba/types.hpp"

namespace srba::bench {

inline constexpr const char* kTraceHeader =
    "t,k,oracle_total,oracle_grad_F,oracle_grad1_G,oracle_hvp,oracle_jvp,h,"
    "grad_h_sq,subopt,wall_ms";

/// Fixed-header trace CSV; missing metrics are empty fields, doubles are
/// written with 17 significant digits so identical runs produce identical
/// bytes.
void write_trace_csv(const std::string& path,
                     const std::vector<TraceRecord>& trace);

std::vector<TraceRecord> read_trace_csv(const std::string& path);

std::string format_double(double v);

}  // namespace srba::bench
