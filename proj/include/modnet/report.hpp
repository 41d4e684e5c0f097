#ifndef MODNET_REPORT_HPP
#define MODNET_REPORT_HPP

#include <string>
#include <vector>

#include "modnet/search.hpp"

namespace modnet {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

void write_text_atomic(const std::string& path, const std::string& content);

// One CSV record per committed operator. Elapsed time is deliberately
// omitted so identical runs produce identical bytes.
std::string trace_csv(const std::vector<TraceRecord>& trace);

}  // namespace modnet

#endif
