#include "hematch/cluster/orchestrator.hpp"

#include <condition_variable>
#include <map>
#include <mutex>
#include <thread>

#include "hematch/common/errors.hpp"

namespace hematch::cluster {

namespace {

// Shared between the orchestrator and one worker thread; outlives both via
// shared_ptr so a timed-out worker can finish (and be discarded) safely.
struct PendingCall {
    std::mutex mu;
    std::condition_variable cv;
    bool done = false;
    std::vector<auth::CompressedGroup> result;
    std::string error;
};

} // namespace

std::vector<std::vector<auth::CompressedGroup>> fan_out(const ClusterPlan& plan,
                                                        const he::Ciphertext& c_u,
                                                        const WorkerCall& call,
                                                        std::chrono::milliseconds deadline) {
    const size_t n = plan.ranges.size();
    std::vector<std::shared_ptr<PendingCall>> pending(n);

    // Worker threads are detached so a straggler cannot hold up the
    // fail-stop error; everything they touch is owned via shared_ptr.
    auto query = std::make_shared<const he::Ciphertext>(c_u);
    auto worker_call = std::make_shared<const WorkerCall>(call);

    for (size_t w = 0; w < n; ++w) {
        auto state = std::make_shared<PendingCall>();
        pending[w] = state;
        if (plan.ranges[w].empty()) {
            state->done = true;
            continue;
        }
        std::thread([state, query, worker_call, range = plan.ranges[w], w] {
            std::vector<auth::CompressedGroup> result;
            std::string error;
            try {
                result = (*worker_call)(w, range, *query);
            } catch (const std::exception& e) {
                error = e.what();
                if (error.empty()) error = "worker call failed";
            }
            std::lock_guard lock(state->mu);
            state->result = std::move(result);
            state->error = std::move(error);
            state->done = true;
            state->cv.notify_all();
        }).detach();
    }

    const auto cutoff = std::chrono::steady_clock::now() + deadline;
    std::vector<std::string> faults(n);
    for (size_t w = 0; w < n; ++w) {
        auto& state = *pending[w];
        std::unique_lock lock(state.mu);
        if (!state.cv.wait_until(lock, cutoff, [&] { return state.done; }))
            faults[w] = "deadline exceeded";
        else if (!state.error.empty())
            faults[w] = state.error;
    }

    for (size_t w = 0; w < n; ++w)
        if (!faults[w].empty())
            throw WorkerFault("worker " + std::to_string(w + 1) + " failed (" + faults[w] +
                                   "); shards " + plan.ranges[w].label() + " unscored");

    std::vector<std::vector<auth::CompressedGroup>> out(n);
    for (size_t w = 0; w < n; ++w) {
        std::lock_guard lock(pending[w]->mu);
        out[w] = std::move(pending[w]->result);
    }
    return out;
}

std::vector<auth::CompressedGroup> aggregate(
    const ClusterPlan& plan, std::span<const std::vector<auth::CompressedGroup>> partials,
    const he::SlotBackend& backend) {
    if (partials.size() != plan.ranges.size())
        throw AggregationError("expected one partial per worker");

    std::map<uint32_t, auth::CompressedGroup> merged;
    for (size_t w = 0; w < partials.size(); ++w) {
        // Groups this worker's range must cover.
        std::vector<bool> expected;
        for (size_t s = plan.ranges[w].begin; s < plan.ranges[w].end; ++s) {
            size_t g = s / 16;
            if (expected.size() <= g) expected.resize(g + 1, false);
            expected[g] = true;
        }

        for (const auto& group : partials[w]) {
            if (group.group_index >= expected.size() || !expected[group.group_index])
                throw AggregationError("worker " + std::to_string(w + 1) +
                                       " returned group " + std::to_string(group.group_index) +
                                       " outside its shard range");
            expected[group.group_index] = false;

            auto it = merged.find(group.group_index);
            if (it == merged.end()) {
                merged.emplace(group.group_index, group);
                continue;
            }
            auto& acc = it->second;
            for (size_t s = 0; s < group.valid_slots.size(); ++s)
                if (group.valid_slots.get(s) && acc.valid_slots.get(s))
                    throw AggregationError("slot " + std::to_string(s) + " of group " +
                                           std::to_string(group.group_index) +
                                           " claimed by two workers");
            acc.result = backend.add(acc.result, group.result);
            for (size_t s = 0; s < group.valid_slots.size(); ++s)
                if (group.valid_slots.get(s)) acc.valid_slots.set(s);
        }

        for (size_t g = 0; g < expected.size(); ++g)
            if (expected[g])
                throw AggregationError("worker " + std::to_string(w + 1) +
                                       " returned no result for group " + std::to_string(g));
    }

    std::vector<auth::CompressedGroup> out;
    out.reserve(merged.size());
    for (auto& [index, group] : merged) out.push_back(std::move(group));
    return out;
}

std::vector<auth::CompressedGroup> cluster_auth(const ClusterPlan& plan,
                                                const he::Ciphertext& c_u,
                                                const WorkerCall& call,
                                                const he::SlotBackend& backend,
                                                std::chrono::milliseconds deadline) {
    auto partials = fan_out(plan, c_u, call, deadline);
    return aggregate(plan, partials, backend);
}

} // namespace hematch::cluster
