#include "epsmode/app/cache.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace epsmode::app
{

namespace
{

constexpr char magic[4] = {'E', 'P', 'S', 'M'};

template <class T> void put(std::string &buf, T value)
{
    static_assert(std::endian::native == std::endian::little, "cache writer assumes a little-endian host");
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    buf.append(bytes, sizeof(T));
}

class Cursor
{
public:
    explicit Cursor(const std::string &buf) : buf_(buf) {}

    template <class T> T take()
    {
        if (pos_ + sizeof(T) > buf_.size())
        {
            throw CacheError("mode cache is truncated");
        }
        T value;
        std::memcpy(&value, buf_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::size_t remaining() const { return buf_.size() - pos_; }

private:
    const std::string &buf_;
    std::size_t pos_ = 0;
};

} // namespace

std::filesystem::path sidecar_path(const std::filesystem::path &path)
{
    auto p = path;
    p += ".json";
    return p;
}

void save_mode_cache(const ModeSet &modes, const std::filesystem::path &path, const std::string &hash)
{
    const Grid &g = modes.grid();
    const std::size_t n = g.size();
    std::string buf;
    buf.reserve(64 + 8 * modes.size() * (1 + 6 * n));
    buf.append(magic, 4);
    put<std::uint32_t>(buf, cache_version);
    for (int a = 0; a < 3; ++a)
    {
        put<std::uint32_t>(buf, static_cast<std::uint32_t>(g.dims()[a]));
    }
    for (int a = 0; a < 3; ++a)
    {
        put<double>(buf, g.lengths()[a]);
    }
    put<std::uint64_t>(buf, modes.size());
    for (double w : modes.omegas())
    {
        put<double>(buf, w);
    }
    const auto &f = modes.matrix();
    for (Eigen::Index m = 0; m < f.cols(); ++m)
    {
        for (std::size_t i = 0; i < n; ++i)
        {
            for (std::size_t c = 0; c < 3; ++c)
            {
                const cplx v = f(static_cast<Eigen::Index>(c * n + i), m);
                put<double>(buf, v.real());
                put<double>(buf, v.imag());
            }
        }
    }
    if (path.has_parent_path())
    {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out)
    {
        throw CacheError("cannot write mode cache '" + path.string() + "'");
    }
    const nlohmann::json side = {{"format", "EPSM"},
                                 {"version", cache_version},
                                 {"config_hash", hash},
                                 {"normalization", ModeSet::normalization_tag},
                                 {"phase", ModeSet::phase_tag},
                                 {"degeneracy_tol", modes.degeneracy_tol()},
                                 {"count", modes.size()}};
    std::ofstream sc(sidecar_path(path), std::ios::trunc);
    sc << side.dump(2) << '\n';
    if (!sc)
    {
        throw CacheError("cannot write cache sidecar");
    }
}

ModeSet load_mode_cache(const std::filesystem::path &path, const DielectricProfile &eps, const std::string &hash,
                        bool ignore_hash)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw CacheError("cannot open mode cache '" + path.string() + "'");
    }
    const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < 4 || std::memcmp(buf.data(), magic, 4) != 0)
    {
        throw CacheError("not a mode cache (bad magic)");
    }
    Cursor cur(buf);
    cur.take<std::uint32_t>();
    const auto version = cur.take<std::uint32_t>();
    if (version != cache_version)
    {
        throw CacheError("unsupported mode cache version " + std::to_string(version));
    }

    nlohmann::json side;
    {
        std::ifstream sc(sidecar_path(path));
        if (!sc)
        {
            throw CacheError("mode cache sidecar missing");
        }
        try
        {
            side = nlohmann::json::parse(sc);
        }
        catch (const nlohmann::json::exception &e)
        {
            throw CacheError(std::string("bad cache sidecar: ") + e.what());
        }
    }
    if (!ignore_hash && side.value("config_hash", std::string()) != hash)
    {
        throw CacheError("mode cache was written for a different configuration");
    }
    if (side.value("normalization", std::string()) != ModeSet::normalization_tag)
    {
        throw CacheError("mode cache has an unknown normalization");
    }

    const Grid &g = eps.grid();
    Index3 dims{};
    Real3 lengths{};
    for (int a = 0; a < 3; ++a)
    {
        dims[a] = static_cast<int>(cur.take<std::uint32_t>());
    }
    for (int a = 0; a < 3; ++a)
    {
        lengths[a] = cur.take<double>();
    }
    if (dims != g.dims() || lengths != g.lengths())
    {
        throw CacheError("mode cache grid differs from the configured grid");
    }
    const auto count = cur.take<std::uint64_t>();
    const std::size_t n = g.size();
    if (count > 2 * n || cur.remaining() != count * 8 * (1 + 6 * n))
    {
        throw CacheError("mode cache is truncated or has trailing data");
    }
    std::vector<double> omegas(count);
    for (auto &w : omegas)
    {
        w = cur.take<double>();
    }
    Eigen::MatrixXcd fields(static_cast<Eigen::Index>(3 * n), static_cast<Eigen::Index>(count));
    for (Eigen::Index m = 0; m < fields.cols(); ++m)
    {
        for (std::size_t i = 0; i < n; ++i)
        {
            for (std::size_t c = 0; c < 3; ++c)
            {
                const double re = cur.take<double>();
                const double im = cur.take<double>();
                fields(static_cast<Eigen::Index>(c * n + i), m) = cplx(re, im);
            }
        }
    }
    return ModeSet(eps, std::move(omegas), std::move(fields), side.value("degeneracy_tol", 1e-6));
}

} // namespace epsmode::app
