#pragma once

#include <iosfwd>
#include <string>

#include "mixvb/mixture_model.hpp"

namespace mixvb {

/// Column format: header line `kind=categorical,V=<int>` or `kind=real`, then
/// one observation per line (1-based categories; reals round-trip at 17
/// significant digits). A zero-byte file is the empty dataset of unspecified
/// kind. Parse failures raise InputError naming the 1-based line.
Dataset parse_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::string& path);

void write_dataset_csv(const Dataset& data, std::ostream& out);
void write_dataset_csv(const Dataset& data, const std::string& path);

}  // namespace mixvb
