#pragma once

#include <iosfwd>
#include <string>

#include "itr/types.hpp"

namespace itr {

/// Dataset CSV: header `id,y,a,x1,...,xp[,delta_star,prop_true]`, UTF-8,
/// '.' decimal, one unit per row. Truth columns are written only when the
/// dataset carries them.
void write_dataset_csv(std::ostream& os, const Dataset& data,
                       bool include_truth = true);

Dataset read_dataset_csv(std::istream& is);

Dataset read_dataset_csv_file(const std::string& path);
void write_dataset_csv_file(const std::string& path, const Dataset& data,
                            bool include_truth = true);

}  // namespace itr
