#ifndef BIDC_IO_HPP
#define BIDC_IO_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>

namespace bidc {

// write via a temporary file in the same directory, then rename: an
// interrupted run never leaves a partial file at the declared path
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

// write-then-rename around a producer that streams into a temp path
void atomic_write_with(const std::filesystem::path& path,
                       const std::function<void(const std::string& tmp_path)>& producer);

std::string read_file(const std::filesystem::path& path);

// FNV-1a 64-bit, used for config hashes in manifests and CSV headers
std::uint64_t fnv1a_hash(const std::string& data);
std::string hash_hex(std::uint64_t h);

std::string current_timestamp_utc();

} // namespace bidc

#endif
