#ifndef CAPDETAIL_TEXT_H_
#define CAPDETAIL_TEXT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace capdetail {

// Splits on Unicode White_Space code points (UTF-8 input). Bytes that do not
// decode as UTF-8 are treated as ordinary token characters.
std::vector<std::string_view> SplitUnicodeWhitespace(std::string_view text);

std::string TrimWhitespace(std::string_view text);

// Lowercased (ASCII), whitespace-collapsed form used for duplicate detection.
std::string NormalizeKey(std::string_view text);

std::string Sha256Hex(std::string_view data);

// Shortest decimal that round-trips to the same double.
std::string FormatDouble(double value);

std::string ReadFile(const std::filesystem::path& path);

// Writes via a sibling temp file and rename so readers never see a partial
// file and concurrent writers of identical content are harmless.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view data);

}  // namespace capdetail

#endif  // CAPDETAIL_TEXT_H_
