#pragma once

#include <filesystem>
#include <iosfwd>

#include "hvac/data/sequence.hpp"

namespace hvac::data {

/// Header: seq_id,minute,t_obs,t_true,t_out,a_h,a_vent,a_ac,noise_std.
/// t_true is omitted when the dataset carries no ground truth.
void write_csv(const Dataset& dataset, std::ostream& out);
void write_csv(const Dataset& dataset, const std::filesystem::path& path);

/// Rows are grouped by seq_id in order of first appearance; minutes must run
/// 0, 1, 2, ... within each sequence. t_true and noise_std are optional columns.
Dataset read_csv(std::istream& in);
Dataset read_csv(const std::filesystem::path& path);

/// `<path>.meta`: one `key = value` line per metadata entry.
void write_metadata(const Dataset& dataset, const std::filesystem::path& csv_path);

}  // namespace hvac::data
