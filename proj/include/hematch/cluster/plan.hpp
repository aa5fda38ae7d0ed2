#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace hematch::cluster {

// Half-open shard range [begin, end); empty when begin == end.
struct ShardRange {
    size_t begin = 0;
    size_t end = 0;

    size_t size() const { return end - begin; }
    bool empty() const { return begin == end; }

    // Inclusive form for diagnostics: "3..5".
    std::string label() const;

    friend bool operator==(const ShardRange&, const ShardRange&) = default;
};

// Contiguous partition of [0, shard_count) across workers.  Sizes differ by
// at most one; the remainder lands on the trailing workers, so 10 shards
// over 3 workers splits 3/3/4.
struct ClusterPlan {
    size_t shard_count = 0;
    std::vector<ShardRange> ranges; // one per worker, in worker order
};

// ConfigError when worker_count is zero.  Deterministic.
ClusterPlan make_plan(size_t shard_count, size_t worker_count);

} // namespace hematch::cluster
