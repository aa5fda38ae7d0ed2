#pragma once

#include <chrono>
#include <functional>
#include <span>
#include <vector>

#include "hematch/auth/engine.hpp"
#include "hematch/cluster/plan.hpp"

namespace hematch::cluster {

// How a worker is reached: in-process engine call in tests, socket RPC in
// deployment.  Must be safe to invoke from a fresh thread.
using WorkerCall = std::function<std::vector<auth::CompressedGroup>(
    size_t worker_index, const ShardRange& range, const he::Ciphertext& c_u)>;

constexpr std::chrono::milliseconds default_worker_deadline{10000};

// Issues one call per non-empty range concurrently and joins them against
// the deadline.  Fail-stop: any fault or timeout raises WorkerFault
// naming the 1-based worker and its shard range; no partial answer escapes.
// Result order follows worker order (empty ranges yield empty partials).
std::vector<std::vector<auth::CompressedGroup>> fan_out(
    const ClusterPlan& plan, const he::Ciphertext& c_u, const WorkerCall& call,
    std::chrono::milliseconds deadline = default_worker_deadline);

// Slotwise addition of partials per output group, with the validity bitmaps
// merged.  AggregationError when a worker's partial misses a group its range
// covers or when two partials claim the same slot.
std::vector<auth::CompressedGroup> aggregate(
    const ClusterPlan& plan, std::span<const std::vector<auth::CompressedGroup>> partials,
    const he::SlotBackend& backend);

// fan_out + aggregate.
std::vector<auth::CompressedGroup> cluster_auth(
    const ClusterPlan& plan, const he::Ciphertext& c_u, const WorkerCall& call,
    const he::SlotBackend& backend,
    std::chrono::milliseconds deadline = default_worker_deadline);

} // namespace hematch::cluster
