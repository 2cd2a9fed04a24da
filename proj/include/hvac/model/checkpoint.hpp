#pragma once

#include <filesystem>
#include <iosfwd>

#include "hvac/model/params.hpp"

namespace hvac::model {

inline constexpr int kCheckpointVersion = 1;

/// Text header of `key = value` lines, a `values:` marker, then one weight per
/// line at round-trip precision. The header carries an FNV-1a checksum of the
/// value lines.
void save_checkpoint(const ModelParams& p, std::ostream& out);
void save_checkpoint(const ModelParams& p, const std::filesystem::path& path);

/// Throws ValidationError on version mismatch, layout mismatch or checksum failure.
ModelParams load_checkpoint(std::istream& in);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace hvac::model
