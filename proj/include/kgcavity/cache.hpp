#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bogoliubov.hpp"
#include "error.hpp"
#include "format.hpp"
#include "version.hpp"

namespace kgcavity {

/// Directory of cached blocks: <digest>.csv payload plus <digest>.json metadata.
class BlockCache {
public:
    struct Entry {
        std::string digest;
        std::uintmax_t bytes = 0;
        nlohmann::json meta;
    };

    explicit BlockCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

    [[nodiscard]] const std::filesystem::path& directory() const noexcept { return dir_; }
    [[nodiscard]] std::filesystem::path payload_path(const std::string& digest) const { return dir_ / (digest + ".csv"); }
    [[nodiscard]] std::filesystem::path meta_path(const std::string& digest) const { return dir_ / (digest + ".json"); }

    /// Returns nullopt on a miss; throws CacheIOError on an unreadable or corrupt entry.
    [[nodiscard]] std::optional<BogoliubovBlock> load(const std::string& digest, const Region& region) const {
        const auto path = payload_path(digest);
        std::error_code ec;
        if (!std::filesystem::exists(path, ec)) return std::nullopt;
        std::ifstream in(path);
        if (!in) throw CacheIOError("cannot open cache entry " + path.string());

        BogoliubovBlock block;
        block.region = region;
        block.cfg_hash = digest;
        std::string line;
        bool have_shape = false;
        std::size_t filled = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            if (line[0] == '#') {
                unsigned long long rows = 0, cols = 0;
                if (std::sscanf(line.c_str(), "# rows=%llu cols=%llu", &rows, &cols) == 2) {
                    block.rows = rows;
                    block.cols = cols;
                    block.alpha.assign(block.rows * block.cols, 0.0);
                    block.beta.assign(block.rows * block.cols, 0.0);
                    have_shape = true;
                }
                continue;
            }
            if (line.rfind("m,", 0) == 0) continue;
            if (!have_shape) throw CacheIOError("cache entry " + digest + " lacks a shape header");
            std::size_t fields[3];
            std::size_t pos = 0;
            for (int f = 0; f < 3; ++f) {
                pos = line.find(',', pos);
                if (pos == std::string::npos) throw CacheIOError("malformed cache line in " + digest);
                fields[f] = pos++;
            }
            double m = 0, N = 0, a = 0, b = 0;
            const std::string_view sv(line);
            if (!parse_double(sv.substr(0, fields[0]), m) ||
                !parse_double(sv.substr(fields[0] + 1, fields[1] - fields[0] - 1), N) ||
                !parse_double(sv.substr(fields[1] + 1, fields[2] - fields[1] - 1), a) ||
                !parse_double(sv.substr(fields[2] + 1), b))
                throw CacheIOError("malformed number in cache entry " + digest);
            if (m < 1 || N < 1 || m > static_cast<double>(block.rows) || N > static_cast<double>(block.cols))
                throw CacheIOError("index out of shape in cache entry " + digest);
            const std::size_t k = (static_cast<std::size_t>(m) - 1) * block.cols + static_cast<std::size_t>(N) - 1;
            block.alpha[k] = a;
            block.beta[k] = b;
            ++filled;
        }
        if (!have_shape || filled != block.rows * block.cols)
            throw CacheIOError("truncated cache entry " + digest);
        block.cache_status = CacheStatus::Hit;
        return block;
    }

    void store(const BogoliubovBlock& block, const CavityConfig& cfg, const Truncation& trunc) const {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw CacheIOError("cannot create cache directory " + dir_.string() + ": " + ec.message());
        const auto final_path = payload_path(block.cfg_hash);
        const auto tmp_path = dir_ / (block.cfg_hash + ".csv.tmp");
        {
            std::ofstream out(tmp_path, std::ios::binary);
            if (!out) throw CacheIOError("cannot write cache entry " + tmp_path.string());
            out << "# kgcavity bogoliubov block\n";
            out << "# region=" << to_string(block.region) << "\n";
            out << "# rows=" << block.rows << " cols=" << block.cols << "\n";
            out << "m,N,alpha,beta\n";
            std::string buf;
            for (std::size_t m = 1; m <= block.rows; ++m) {
                for (std::size_t N = 1; N <= block.cols; ++N) {
                    buf.clear();
                    buf += std::to_string(m);
                    buf += ',';
                    buf += std::to_string(N);
                    buf += ',';
                    buf += format_double(block.alpha_at(m, N));
                    buf += ',';
                    buf += format_double(block.beta_at(m, N));
                    buf += '\n';
                    out << buf;
                }
            }
            if (!out) throw CacheIOError("short write to cache entry " + tmp_path.string());
        }
        std::filesystem::rename(tmp_path, final_path, ec);
        if (ec) throw CacheIOError("cannot finalize cache entry " + final_path.string() + ": " + ec.message());

        nlohmann::json meta;
        meta["digest"] = block.cfg_hash;
        meta["region"] = to_string(block.region);
        meta["r_tilde"] = cfg.reduced_r();
        meta["mu_tilde"] = cfg.reduced_mu();
        if (block.region.kind == RegionKind::Probe) meta["probe_start_tilde"] = block.region.probe_start / cfg.R;
        meta["truncation"] = {{"n_max_global", trunc.n_max_global},
                              {"m_max_local", trunc.m_max_local},
                              {"resonance_eps", trunc.resonance_eps}};
        meta["created"] = utc_timestamp();
        meta["version"] = version_string;
        std::ofstream mout(meta_path(block.cfg_hash));
        if (!mout) throw CacheIOError("cannot write cache metadata for " + block.cfg_hash);
        mout << meta.dump(2) << "\n";
    }

    [[nodiscard]] std::vector<Entry> list() const {
        std::vector<Entry> out;
        std::error_code ec;
        if (!std::filesystem::is_directory(dir_, ec)) return out;
        for (const auto& e : std::filesystem::directory_iterator(dir_, ec)) {
            if (e.path().extension() != ".csv") continue;
            Entry entry;
            entry.digest = e.path().stem().string();
            entry.bytes = e.file_size(ec);
            std::ifstream min(meta_path(entry.digest));
            if (min) entry.meta = nlohmann::json::parse(min, nullptr, false);
            out.push_back(std::move(entry));
        }
        std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) { return a.digest < b.digest; });
        return out;
    }

    /// Removes all cache entries; returns the number of files deleted.
    std::size_t purge() const {
        std::size_t removed = 0;
        std::error_code ec;
        if (!std::filesystem::is_directory(dir_, ec)) return 0;
        std::vector<std::filesystem::path> doomed;
        for (const auto& e : std::filesystem::directory_iterator(dir_, ec)) {
            const auto ext = e.path().extension();
            if (ext == ".csv" || ext == ".json" || ext == ".tmp") doomed.push_back(e.path());
        }
        for (const auto& p : doomed)
            if (std::filesystem::remove(p, ec)) ++removed;
        return removed;
    }

private:
    static std::string utc_timestamp() {
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }

    std::filesystem::path dir_;
};

/// Block for one family: consult the cache first, compute and store on a miss.
///
/// Cache failures never abort the computation; they are reported through
/// cache_status (and the optional message).
[[nodiscard]] inline BogoliubovBlock build_block(const Region& region, const CavityConfig& cfg, const Truncation& trunc,
                                                 const BlockCache* cache = nullptr, std::string* cache_message = nullptr) {
    trunc.validate();
    if (cache == nullptr) return compute_block(region, cfg, trunc);
    const std::string digest = block_digest(region, cfg, trunc);
    bool failed = false;
    try {
        if (auto hit = cache->load(digest, region)) return std::move(*hit);
    } catch (const CacheIOError& e) {
        failed = true;
        if (cache_message) *cache_message = e.what();
    }
    BogoliubovBlock block = compute_block(region, cfg, trunc);
    block.cache_status = failed ? CacheStatus::Error : CacheStatus::Miss;
    try {
        cache->store(block, cfg, trunc);
    } catch (const CacheIOError& e) {
        block.cache_status = CacheStatus::Error;
        if (cache_message) *cache_message = e.what();
    }
    return block;
}

}  // namespace kgcavity
