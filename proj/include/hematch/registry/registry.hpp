#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "hematch/common/bitset.hpp"
#include "hematch/he/backend.hpp"

namespace hematch::registry {

// One packed shard: up to capacity registered vectors, vector j occupying
// slots 16j..16j+15 of c_r.
struct RegistryShard {
    uint32_t shard_index = 0;
    he::Ciphertext c_r;
    DynBitset occupancy;
};

struct Allocation {
    uint32_t shard_index = 0;
    uint32_t local_index = 0;
};

// Pure allocation rule: registrations fill shards sequentially.
Allocation allocate_slot(size_t n_registered, size_t capacity);

// Writes the persisted directory layout (shard-<n>.hct, identities.txt,
// occupancy.txt) from already-built parts.  Registry::persist is this applied
// to a snapshot; bulk fixture builders call it directly.
void write_registry_dir(const std::filesystem::path& dir,
                        std::span<const std::shared_ptr<const RegistryShard>> shards,
                        const std::map<uint64_t, std::string>& identities);

// Encrypted registry plus the plaintext index -> identity map.  Mutations
// are serialized behind one writer lock; authentication works on immutable
// snapshots, so readers never block writers.
class Registry {
public:
    Registry(std::shared_ptr<he::SlotBackend> backend, he::GaloisKeys galois);

    size_t capacity() const { return capacity_; }
    size_t registered_count() const;
    size_t shard_count() const;

    // Next free slot under sequential allocation.
    Allocation next_slot() const;

    // allocate + register in one step; returns the global index.
    uint64_t enroll(const he::Ciphertext& c_u, const std::string& user_id);

    // Explicit-coordinate registration: c_r += rotate_right(c_u, 16*local).
    // ConflictError when the block is occupied; AlignmentError when c_u is
    // not a fresh-level registration ciphertext.
    uint64_t register_at(const he::Ciphertext& c_u, const std::string& user_id,
                         uint32_t shard_index, uint32_t local_index);

    // NotFoundError for unknown indices.
    std::string lookup_identity(uint64_t global_index) const;

    // Immutable snapshot for scoring.
    std::vector<std::shared_ptr<const RegistryShard>> snapshot() const;
    std::vector<std::shared_ptr<const RegistryShard>> snapshot(size_t first_shard,
                                                               size_t last_shard) const;

    // Directory layout: shard-<n>.hct ciphertext containers, identities.txt,
    // occupancy.txt.  load(persist(R)) is byte-identical.
    void persist(const std::filesystem::path& dir) const;
    static std::unique_ptr<Registry> load(const std::filesystem::path& dir,
                                          std::shared_ptr<he::SlotBackend> backend,
                                          he::GaloisKeys galois);

private:
    std::shared_ptr<he::SlotBackend> backend_;
    he::GaloisKeys galois_;
    size_t capacity_;

    mutable std::mutex mu_;
    std::vector<std::shared_ptr<const RegistryShard>> shards_;
    std::map<uint64_t, std::string> identities_;
};

} // namespace hematch::registry
