#ifndef EEOPT_IO_HPP
#define EEOPT_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace eeopt::io {

/// %.17g — round-trip exact for IEEE doubles.
std::string format_double(double v);

/// Write-then-rename so readers never observe a partial file.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_text(const std::filesystem::path& path);

std::uint64_t file_checksum(const std::filesystem::path& path);

/// Comma-separated, header row, LF line endings, UTF-8.
class CsvBuilder {
public:
    explicit CsvBuilder(const std::vector<std::string>& header);
    CsvBuilder& add(double v);
    CsvBuilder& add(std::int64_t v);
    CsvBuilder& add(std::uint64_t v);
    CsvBuilder& add(const std::string& s);
    void end_row();
    const std::string& str() const { return buf_; }

private:
    std::string buf_;
    std::size_t columns_ = 0;
    std::size_t in_row_ = 0;
};

}  // namespace eeopt::io

#endif
