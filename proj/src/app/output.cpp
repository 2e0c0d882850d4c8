#include "epsmode/app/output.hpp"

#include "epsmode/errors.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

namespace epsmode::app
{

std::string format_double(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add(std::vector<Cell> row)
{
    if (row.size() != header_.size())
    {
        throw InvalidArgument("CSV row width does not match header");
    }
    rows_.push_back(std::move(row));
}

std::string CsvTable::body() const
{
    std::string out;
    auto line = [&out](const auto &cells, auto &&fmt) {
        for (std::size_t i = 0; i < cells.size(); ++i)
        {
            if (i)
            {
                out += ',';
            }
            out += fmt(cells[i]);
        }
        out += '\n';
    };
    line(header_, [](const std::string &s) { return s; });
    for (const auto &row : rows_)
    {
        line(row, [](const Cell &c) {
            if (const auto *d = std::get_if<double>(&c))
            {
                return format_double(*d);
            }
            if (const auto *i = std::get_if<std::int64_t>(&c))
            {
                return std::to_string(*i);
            }
            return std::get<std::string>(c);
        });
    }
    return out;
}

void CsvTable::write(const std::filesystem::path &path) const
{
    if (path.has_parent_path())
    {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::trunc);
    out << "# generated " << utc_timestamp() << '\n' << body();
    if (!out)
    {
        throw Error("cannot write '" + path.string() + "'");
    }
}

void write_json(const std::filesystem::path &path, const nlohmann::json &doc)
{
    if (path.has_parent_path())
    {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::trunc);
    out << doc.dump(2) << '\n';
    if (!out)
    {
        throw Error("cannot write '" + path.string() + "'");
    }
}

} // namespace epsmode::app
