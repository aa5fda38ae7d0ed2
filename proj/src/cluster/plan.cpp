#include "hematch/cluster/plan.hpp"

#include "hematch/common/errors.hpp"

namespace hematch::cluster {

std::string ShardRange::label() const {
    if (empty()) return "none";
    return std::to_string(begin) + ".." + std::to_string(end - 1);
}

ClusterPlan make_plan(size_t shard_count, size_t worker_count) {
    if (worker_count == 0) throw ConfigError("cluster plan needs at least one worker");

    ClusterPlan p;
    p.shard_count = shard_count;
    p.ranges.reserve(worker_count);

    const size_t base = shard_count / worker_count;
    const size_t remainder = shard_count % worker_count;
    size_t next = 0;
    for (size_t w = 0; w < worker_count; ++w) {
        // The last `remainder` workers carry one extra shard.
        size_t len = base + (w >= worker_count - remainder ? 1 : 0);
        p.ranges.push_back({next, next + len});
        next += len;
    }
    return p;
}

} // namespace hematch::cluster
