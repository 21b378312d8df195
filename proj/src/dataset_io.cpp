#include "mixvb/dataset_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "mixvb/errors.hpp"

namespace mixvb {

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    throw InputError("line " + std::to_string(line) + ": " + what);
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

}  // namespace

Dataset parse_dataset_csv(std::istream& in) {
    Dataset data;
    std::string line;
    if (!std::getline(in, line)) return data;  // zero-byte file: empty, kind unset
    line = strip_cr(line);

    std::size_t line_no = 1;
    if (line == "kind=real") {
        data.kind = DataKind::Real;
    } else if (line.rfind("kind=categorical,V=", 0) == 0) {
        const std::string v = line.substr(19);
        char* end = nullptr;
        errno = 0;
        const long parsed = std::strtol(v.c_str(), &end, 10);
        if (errno != 0 || end == v.c_str() || *end != '\0' || parsed < 2) {
            fail(line_no, "header needs an integer V >= 2, got '" + v + "'");
        }
        data.kind = DataKind::Categorical;
        data.category_count = static_cast<int>(parsed);
    } else {
        fail(line_no, "header must be 'kind=real' or 'kind=categorical,V=<int>', got '" + line + "'");
    }

    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) {
            if (in.eof()) break;  // trailing newline
            fail(line_no, "blank observation line");
        }
        char* end = nullptr;
        errno = 0;
        if (*data.kind == DataKind::Categorical) {
            const long v = std::strtol(line.c_str(), &end, 10);
            if (errno != 0 || end == line.c_str() || *end != '\0') {
                fail(line_no, "expected an integer category, got '" + line + "'");
            }
            if (v < 1 || v > data.category_count) {
                fail(line_no, "category " + std::to_string(v) + " outside [1, " +
                                  std::to_string(data.category_count) + "]");
            }
            data.categories.push_back(static_cast<int>(v));
        } else {
            const double x = std::strtod(line.c_str(), &end);
            if (errno != 0 || end == line.c_str() || *end != '\0' || !std::isfinite(x)) {
                fail(line_no, "expected a finite real observation, got '" + line + "'");
            }
            data.reals.push_back(x);
        }
    }
    return data;
}

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open dataset file: " + path);
    return parse_dataset_csv(in);
}

void write_dataset_csv(const Dataset& data, std::ostream& out) {
    if (!data.kind.has_value()) return;  // unspecified empty dataset: zero bytes
    if (*data.kind == DataKind::Categorical) {
        out << "kind=categorical,V=" << data.category_count << "\n";
        for (int v : data.categories) out << v << "\n";
    } else {
        out << "kind=real\n";
        char buf[40];
        for (double x : data.reals) {
            std::snprintf(buf, sizeof(buf), "%.17g", x);
            out << buf << "\n";
        }
    }
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open output file: " + path);
    write_dataset_csv(data, out);
    if (!out.good()) throw InputError("failed writing dataset to " + path);
}

}  // namespace mixvb
