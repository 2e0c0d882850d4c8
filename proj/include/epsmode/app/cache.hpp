#pragma once

#include "epsmode/errors.hpp"
#include "epsmode/modes.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace epsmode::app
{

/// Unreadable or inconsistent mode cache.
class CacheError : public Error
{
public:
    using Error::Error;
};

/// Binary mode cache, little-endian:
///   "EPSM", u32 version, u32 dims[3], f64 lengths[3], u64 count,
///   f64 omega[count], then for each mode, point (flat order) and component
///   the pair (re, im) as f64.
/// A JSON sidecar `<path>.json` carries the config hash and the tags.
inline constexpr std::uint32_t cache_version = 1;

void save_mode_cache(const ModeSet &modes, const std::filesystem::path &path, const std::string &hash);

/// Loads a cache written for `eps`. A hash mismatch throws unless
/// `ignore_hash` is set; a grid mismatch always throws.
ModeSet load_mode_cache(const std::filesystem::path &path, const DielectricProfile &eps, const std::string &hash,
                        bool ignore_hash = false);

std::filesystem::path sidecar_path(const std::filesystem::path &path);

} // namespace epsmode::app
