#include "modnet/report.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace modnet {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + tmp);
        f << content;
        if (!f.flush()) throw std::runtime_error("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::string trace_csv(const std::vector<TraceRecord>& trace) {
    std::string out = "iteration,kind,module,variable,score\n";
    for (const TraceRecord& r : trace) {
        out += std::to_string(r.iteration);
        out += ',';
        out += r.kind;
        out += ',';
        out += std::to_string(r.module);
        out += ',';
        out += std::to_string(r.variable);
        out += ',';
        out += format_double(r.score);
        out += '\n';
    }
    return out;
}

}  // namespace modnet
