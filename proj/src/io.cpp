#include "eeopt/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "eeopt/common.hpp"

namespace eeopt::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_atomic(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw io_error("failed writing: " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) throw io_error("rename failed for " + path.string() + ": " + ec.message());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

std::uint64_t file_checksum(const std::filesystem::path& path) {
    const std::string content = read_text(path);
    return fnv1a(content.data(), content.size());
}

CsvBuilder::CsvBuilder(const std::vector<std::string>& header) : columns_(header.size()) {
    if (header.empty()) throw std::invalid_argument("CSV needs at least one column");
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += header[i];
    }
    buf_ += '\n';
}

CsvBuilder& CsvBuilder::add(double v) { return add(format_double(v)); }
CsvBuilder& CsvBuilder::add(std::int64_t v) { return add(std::to_string(v)); }
CsvBuilder& CsvBuilder::add(std::uint64_t v) { return add(std::to_string(v)); }

CsvBuilder& CsvBuilder::add(const std::string& s) {
    if (in_row_ >= columns_) throw std::logic_error("row has more cells than the header");
    if (in_row_) buf_ += ',';
    buf_ += s;
    ++in_row_;
    return *this;
}

void CsvBuilder::end_row() {
    if (in_row_ != columns_) throw std::logic_error("row has fewer cells than the header");
    buf_ += '\n';
    in_row_ = 0;
}

}  // namespace eeopt::io
