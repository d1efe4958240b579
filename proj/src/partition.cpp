#include "effc/partition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace effc::partition {

namespace {

void canonicalize(std::vector<std::vector<std::int64_t>>& blocks) {
    for (auto& b : blocks) std::sort(b.begin(), b.end());
    std::erase_if(blocks, [](const auto& b) { return b.empty(); });
    std::sort(blocks.begin(), blocks.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
}

}  // namespace

Partition Partition::singletons(std::int64_t n) {
    if (n < 1) throw std::domain_error("Partition: n >= 1 required");
    Partition p;
    p.n_ = n;
    p.blocks_.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 1; i <= n; ++i) p.blocks_.push_back({i});
    return p;
}

Partition Partition::single_block(std::int64_t n) {
    if (n < 1) throw std::domain_error("Partition: n >= 1 required");
    Partition p;
    p.n_ = n;
    std::vector<std::int64_t> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 1);
    p.blocks_.push_back(std::move(all));
    return p;
}

Partition Partition::from_blocks(std::vector<std::vector<std::int64_t>> blocks) {
    canonicalize(blocks);
    if (blocks.empty()) throw std::invalid_argument("Partition: at least one block required");
    std::int64_t n = 0, count = 0;
    for (const auto& b : blocks) {
        count += static_cast<std::int64_t>(b.size());
        n = std::max(n, b.back());
    }
    if (n != count) throw std::invalid_argument("Partition: blocks must cover {1..n} disjointly");
    std::vector<bool> seen(static_cast<std::size_t>(n) + 1, false);
    for (const auto& b : blocks)
        for (auto e : b) {
            if (e < 1 || seen[static_cast<std::size_t>(e)])
                throw std::invalid_argument("Partition: blocks must cover {1..n} disjointly");
            seen[static_cast<std::size_t>(e)] = true;
        }
    Partition p;
    p.blocks_ = std::move(blocks);
    p.n_ = n;
    return p;
}

std::string Partition::to_string() const {
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        if (i) os << '|';
        for (std::size_t j = 0; j < blocks_[i].size(); ++j) {
            if (j) os << ',';
            os << blocks_[i][j];
        }
    }
    os << '}';
    return os.str();
}

Partition Partition::parse(const std::string& text) {
    if (text.size() < 2 || text.front() != '{' || text.back() != '}')
        throw std::invalid_argument("Partition::parse: expected {...}");
    std::vector<std::vector<std::int64_t>> blocks;
    std::vector<std::int64_t> current;
    std::int64_t value = -1;
    for (std::size_t i = 1; i + 1 <= text.size() - 1; ++i) {
        const char ch = text[i];
        if (ch >= '0' && ch <= '9') {
            value = (value < 0 ? 0 : value) * 10 + (ch - '0');
        } else if (ch == ',' || ch == '|') {
            if (value < 0) throw std::invalid_argument("Partition::parse: malformed");
            current.push_back(value);
            value = -1;
            if (ch == '|') {
                blocks.push_back(std::move(current));
                current.clear();
            }
        } else {
            throw std::invalid_argument("Partition::parse: unexpected character");
        }
    }
    if (value >= 0) current.push_back(value);
    if (!current.empty()) blocks.push_back(std::move(current));
    return from_blocks(std::move(blocks));
}

Partition Partition::restrict(std::int64_t m) const {
    if (m < 1 || m > n_) throw std::domain_error("Partition::restrict: 1 <= m <= n required");
    std::vector<std::vector<std::int64_t>> blocks;
    for (const auto& b : blocks_) {
        std::vector<std::int64_t> kept;
        for (auto e : b)
            if (e <= m) kept.push_back(e);
        if (!kept.empty()) blocks.push_back(std::move(kept));
    }
    return from_blocks(std::move(blocks));
}

Partition coag(const Partition& pi, const Partition& pi2) {
    const std::int64_t b = pi.block_count();
    if (pi2.ground_size() < b)
        throw std::invalid_argument("coag: pi2 must cover at least #blocks(pi) indices");
    std::vector<std::vector<std::int64_t>> out;
    for (const auto& idx_block : pi2.blocks()) {
        std::vector<std::int64_t> merged;
        for (auto j : idx_block) {
            if (j > b) continue;  // indices beyond the blocks of pi are inert
            const auto& src = pi.blocks()[static_cast<std::size_t>(j - 1)];
            merged.insert(merged.end(), src.begin(), src.end());
        }
        if (!merged.empty()) out.push_back(std::move(merged));
    }
    return Partition::from_blocks(std::move(out));
}

Partition frag(const Partition& pi, const Partition& pi2, std::int64_t k) {
    if (k < 1 || k > pi.block_count()) throw std::domain_error("frag: block index out of range");
    const auto& target = pi.blocks()[static_cast<std::size_t>(k - 1)];
    if (pi2.ground_size() < target.back())
        throw std::invalid_argument("frag: pi2 must cover the elements of block k");
    // Map each element of block k to its block index in pi2.
    std::map<std::int64_t, std::int64_t> owner;  // element -> pi2 block
    {
        std::int64_t idx = 0;
        for (const auto& b : pi2.blocks()) {
            for (auto e : b) owner[e] = idx;
            ++idx;
        }
    }
    std::map<std::int64_t, std::vector<std::int64_t>> pieces;
    for (auto e : target) pieces[owner.at(e)].push_back(e);
    std::vector<std::vector<std::int64_t>> out;
    for (std::int64_t i = 0; i < pi.block_count(); ++i)
        if (i != k - 1) out.push_back(pi.blocks()[static_cast<std::size_t>(i)]);
    for (auto& [unused, piece] : pieces) out.push_back(std::move(piece));
    return Partition::from_blocks(std::move(out));
}

Partition paintbox_sample(const std::vector<double>& masses, std::int64_t n, SplitMix64& rng) {
    double total = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    for (double m : masses) {
        if (m < 0.0 || m > prev)
            throw std::domain_error("paintbox_sample: masses must be nonnegative and decreasing");
        prev = m;
        total += m;
    }
    if (total > 1.0 + 1e-12) throw std::domain_error("paintbox_sample: masses sum above 1");
    std::vector<std::vector<std::int64_t>> interval_blocks(masses.size());
    std::vector<std::vector<std::int64_t>> out;
    for (std::int64_t i = 1; i <= n; ++i) {
        const double u = rng.uniform01();
        double acc = 0.0;
        bool placed = false;
        for (std::size_t b = 0; b < masses.size(); ++b) {
            acc += masses[b];
            if (u < acc) {
                interval_blocks[b].push_back(i);
                placed = true;
                break;
            }
        }
        if (!placed) out.push_back({i});  // dust -> singleton
    }
    for (auto& b : interval_blocks)
        if (!b.empty()) out.push_back(std::move(b));
    return Partition::from_blocks(std::move(out));
}

std::vector<double> asymptotic_frequencies(const Partition& pi) {
    std::vector<double> freq;
    freq.reserve(static_cast<std::size_t>(pi.block_count()));
    const double n = static_cast<double>(pi.ground_size());
    for (const auto& b : pi.blocks()) freq.push_back(static_cast<double>(b.size()) / n);
    std::sort(freq.begin(), freq.end(), std::greater<>());
    return freq;
}

namespace {

// Mutable working state: block list without canonical ordering; snapshots are
// canonicalized on record.
struct Working {
    std::vector<std::vector<std::int64_t>> blocks;

    std::int64_t count() const { return static_cast<std::int64_t>(blocks.size()); }

    void merge(std::size_t a, std::size_t b) {
        if (a > b) std::swap(a, b);
        auto& dst = blocks[a];
        auto& src = blocks[b];
        dst.insert(dst.end(), src.begin(), src.end());
        if (b != blocks.size() - 1) blocks[b] = std::move(blocks.back());
        blocks.pop_back();
    }

    void shatter(std::size_t k) {
        std::vector<std::int64_t> victim = std::move(blocks[k]);
        if (k != blocks.size() - 1) blocks[k] = std::move(blocks.back());
        blocks.pop_back();
        for (auto e : victim) blocks.push_back({e});
    }

    Partition snapshot() const { return Partition::from_blocks(blocks); }
};

}  // namespace

EffcPath simulate_restricted_effc(const ModelParams& params, std::int64_t n, double t_end,
                                  const Partition& initial, SplitMix64& rng,
                                  std::int64_t max_events) {
    if (!(t_end > 0.0)) throw std::domain_error("simulate_restricted_effc: t_end > 0 required");
    if (initial.ground_size() != n)
        throw std::invalid_argument("simulate_restricted_effc: initial must partition [n]");
    Working w{initial.blocks()};
    EffcPath result;
    result.path.emplace_back(0.0, initial);
    KahanSum clock;
    std::int64_t events = 0;
    for (;;) {
        const double b = static_cast<double>(w.count());
        const double rc = coalescence_rate(params, b);
        const double rf = params.lambda * b;
        const double total = rc + rf;
        const double dwell = total > 0.0 ? rng.exponential(total) : std::numeric_limits<double>::infinity();
        if (clock.value() + dwell >= t_end) break;
        clock.add(dwell);
        if (rng.uniform01() * total < rc) {
            // uniformly chosen unordered pair of blocks
            const auto nb = static_cast<std::uint64_t>(w.count());
            const std::uint64_t a = rng.below(nb);
            std::uint64_t b2 = rng.below(nb - 1);
            if (b2 >= a) ++b2;
            w.merge(static_cast<std::size_t>(a), static_cast<std::size_t>(b2));
        } else {
            w.shatter(static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(w.count()))));
        }
        result.path.emplace_back(clock.value(), w.snapshot());
        if (++events >= max_events) {
            result.truncated = true;
            break;
        }
    }
    return result;
}

double first_fragmentation_time(const ModelParams& params, std::int64_t n, SplitMix64& rng) {
    if (!(params.lambda > 0.0))
        throw std::domain_error("first_fragmentation_time: lambda > 0 required");
    Working w{Partition::singletons(n).blocks()};
    KahanSum clock;
    for (;;) {
        const double b = static_cast<double>(w.count());
        const double rc = coalescence_rate(params, b);
        const double total = rc + params.lambda * b;
        clock.add(rng.exponential(total));
        if (rng.uniform01() * total >= rc) return clock.value();
        const auto nb = static_cast<std::uint64_t>(w.count());
        const std::uint64_t a = rng.below(nb);
        std::uint64_t b2 = rng.below(nb - 1);
        if (b2 >= a) ++b2;
        w.merge(static_cast<std::size_t>(a), static_cast<std::size_t>(b2));
    }
}

}  // namespace effc::partition
