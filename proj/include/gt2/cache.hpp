// Versioned on-disk caches. Binary kinds (prime lists, factor-sieve segment
// outputs) use the layout
//
//   bytes 0..3   magic "GT2C"
//   bytes 4..7   format version (u32, little-endian)
//   bytes 8..15  element count (u64, little-endian)
//   then         count u64 values, little-endian
//
// Constants are cached as JSON with an embedded version field. Any mismatch
// (magic, version, length) is treated as a miss: the caller recomputes, and
// the loader reports the reason.
#pragma once

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "gt2/common.hpp"

namespace gt2 {

inline constexpr u32 kCacheFormatVersion = 1;
inline constexpr char kCacheMagic[4] = {'G', 'T', '2', 'C'};

enum class CacheKind { Primes, SpfSegment, Constants };

inline std::string cache_file_name(CacheKind kind, const std::string& tag) {
    switch (kind) {
        case CacheKind::Primes: return "primes-" + tag + ".gt2c";
        case CacheKind::SpfSegment: return "spfseg-" + tag + ".gt2c";
        case CacheKind::Constants: return "constants-" + tag + ".json";
    }
    return tag;
}

struct CacheLoad {
    bool hit = false;
    std::string note;  // why a miss was a miss
    std::vector<u64> values;
};

inline void cache_store_u64(const std::string& dir, CacheKind kind, const std::string& tag,
                            const std::vector<u64>& values, u32 version = kCacheFormatVersion) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    const std::string path = (fs::path(dir) / cache_file_name(kind, tag)).string();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ResourceError("cache: cannot write " + path);
    out.write(kCacheMagic, 4);
    u32 v = version;
    out.write(reinterpret_cast<const char*>(&v), 4);
    u64 n = values.size();
    out.write(reinterpret_cast<const char*>(&n), 8);
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * 8));
    if (!out) throw ResourceError("cache: short write to " + path);
}

inline CacheLoad cache_load_u64(const std::string& dir, CacheKind kind, const std::string& tag) {
    namespace fs = std::filesystem;
    CacheLoad res;
    const std::string path = (fs::path(dir) / cache_file_name(kind, tag)).string();
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        res.note = "absent";
        return res;
    }
    char magic[4];
    u32 version = 0;
    u64 count = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&count), 8);
    if (!in || std::memcmp(magic, kCacheMagic, 4) != 0) {
        res.note = "bad magic";
        return res;
    }
    if (version != kCacheFormatVersion) {
        res.note = "version mismatch";
        return res;
    }
    res.values.resize(count);
    in.read(reinterpret_cast<char*>(res.values.data()), static_cast<std::streamsize>(count * 8));
    if (!in || in.gcount() != static_cast<std::streamsize>(count * 8)) {
        res.note = "truncated payload";
        res.values.clear();
        return res;
    }
    res.hit = true;
    return res;
}

inline void cache_store_text(const std::string& dir, CacheKind kind, const std::string& tag,
                             const std::string& text) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    const std::string path = (fs::path(dir) / cache_file_name(kind, tag)).string();
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ResourceError("cache: cannot write " + path);
    out << text;
}

inline std::optional<std::string> cache_load_text(const std::string& dir, CacheKind kind,
                                                  const std::string& tag) {
    namespace fs = std::filesystem;
    const std::string path = (fs::path(dir) / cache_file_name(kind, tag)).string();
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

}  // namespace gt2
