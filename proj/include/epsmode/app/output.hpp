#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace epsmode::app
{

using Cell = std::variant<double, std::int64_t, std::string>;

/// "%.17g"
std::string format_double(double x);
std::string utc_timestamp();

/// CSV table. The first output line is a `# generated <timestamp>` comment,
/// the only content that varies between runs of the same configuration.
class CsvTable
{
public:
    explicit CsvTable(std::vector<std::string> header);

    void add(std::vector<Cell> row);
    std::size_t rows() const noexcept { return rows_.size(); }
    const std::vector<std::string> &header() const noexcept { return header_; }

    /// Body without the timestamp line.
    std::string body() const;
    void write(const std::filesystem::path &path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<Cell>> rows_;
};

void write_json(const std::filesystem::path &path, const nlohmann::json &doc);

} // namespace epsmode::app
