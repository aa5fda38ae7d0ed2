#include "hematch/registry/registry.hpp"

#include <algorithm>
#include <sstream>

#include "hematch/common/binio.hpp"
#include "hematch/common/errors.hpp"
#include "hematch/he/serialize.hpp"

namespace hematch::registry {

namespace {

constexpr const char* identities_header = "hematch-identities v1";
constexpr const char* occupancy_header = "hematch-occupancy v1";

std::filesystem::path shard_file(const std::filesystem::path& dir, uint32_t index) {
    return dir / ("shard-" + std::to_string(index) + ".hct");
}

} // namespace

Allocation allocate_slot(size_t n_registered, size_t capacity) {
    if (capacity == 0) throw ParamError("shard capacity must be positive");
    return {static_cast<uint32_t>(n_registered / capacity),
            static_cast<uint32_t>(n_registered % capacity)};
}

Registry::Registry(std::shared_ptr<he::SlotBackend> backend, he::GaloisKeys galois)
    : backend_(std::move(backend)),
      galois_(std::move(galois)),
      capacity_(backend_->params().block_capacity()) {
    if (galois_.params_digest != backend_->params_digest())
        throw KeyError("rotation keys belong to a different parameter set");
}

size_t Registry::registered_count() const {
    std::lock_guard lock(mu_);
    return identities_.size();
}

size_t Registry::shard_count() const {
    std::lock_guard lock(mu_);
    return shards_.size();
}

Allocation Registry::next_slot() const {
    std::lock_guard lock(mu_);
    return allocate_slot(identities_.size(), capacity_);
}

uint64_t Registry::enroll(const he::Ciphertext& c_u, const std::string& user_id) {
    auto slot = next_slot();
    return register_at(c_u, user_id, slot.shard_index, slot.local_index);
}

uint64_t Registry::register_at(const he::Ciphertext& c_u, const std::string& user_id,
                               uint32_t shard_index, uint32_t local_index) {
    if (local_index >= capacity_)
        throw BoundsError("local index " + std::to_string(local_index) +
                          " exceeds shard capacity " + std::to_string(capacity_));
    if (c_u.level != backend_->params().max_level)
        throw AlignmentError("registration ciphertext must be at the fresh level");

    // Rotation happens outside the lock: it is the expensive part and touches
    // no shared state.
    auto placed = backend_->rotate(c_u, -16 * static_cast<int>(local_index), galois_);

    const uint64_t global = uint64_t(shard_index) * capacity_ + local_index;
    std::lock_guard lock(mu_);
    if (shard_index > shards_.size())
        throw ConflictError("shard " + std::to_string(shard_index) +
                            " would leave a gap; shards fill sequentially");
    if (shard_index < shards_.size() && shards_[shard_index]->occupancy.get(local_index))
        throw ConflictError("block " + std::to_string(local_index) + " of shard " +
                            std::to_string(shard_index) + " is already occupied");

    auto next = std::make_shared<RegistryShard>();
    next->shard_index = shard_index;
    if (shard_index == shards_.size()) {
        next->c_r = std::move(placed);
        next->occupancy = DynBitset(capacity_);
    } else {
        next->c_r = backend_->add(shards_[shard_index]->c_r, placed);
        next->occupancy = shards_[shard_index]->occupancy;
    }
    next->occupancy.set(local_index, true);

    if (shard_index == shards_.size())
        shards_.push_back(std::move(next));
    else
        shards_[shard_index] = std::move(next);
    identities_[global] = user_id;
    return global;
}

std::string Registry::lookup_identity(uint64_t global_index) const {
    std::lock_guard lock(mu_);
    auto it = identities_.find(global_index);
    if (it == identities_.end())
        throw NotFoundError("no identity registered at index " + std::to_string(global_index));
    return it->second;
}

std::vector<std::shared_ptr<const RegistryShard>> Registry::snapshot() const {
    std::lock_guard lock(mu_);
    return shards_;
}

std::vector<std::shared_ptr<const RegistryShard>> Registry::snapshot(size_t first_shard,
                                                                     size_t last_shard) const {
    std::lock_guard lock(mu_);
    if (first_shard > last_shard || last_shard >= shards_.size())
        throw BoundsError("shard range " + std::to_string(first_shard) + ".." +
                          std::to_string(last_shard) + " outside registry of " +
                          std::to_string(shards_.size()) + " shards");
    return {shards_.begin() + first_shard, shards_.begin() + last_shard + 1};
}

void write_registry_dir(const std::filesystem::path& dir,
                        std::span<const std::shared_ptr<const RegistryShard>> shards,
                        const std::map<uint64_t, std::string>& identities) {
    std::filesystem::create_directories(dir);
    for (const auto& shard : shards)
        write_file(shard_file(dir, shard->shard_index), he::serialize_ciphertext(shard->c_r));

    std::ostringstream ids;
    ids << identities_header << '\n';
    for (const auto& [index, id] : identities) {
        if (id.find('\n') != std::string::npos || id.find('\r') != std::string::npos)
            throw FormatError("user ids must not contain line breaks");
        ids << index << ',' << id << '\n';
    }
    write_text_file(dir / "identities.txt", ids.str());

    std::ostringstream occ;
    occ << occupancy_header << '\n';
    for (const auto& shard : shards)
        occ << shard->shard_index << ',' << shard->occupancy.to_hex() << '\n';
    write_text_file(dir / "occupancy.txt", occ.str());
}

void Registry::persist(const std::filesystem::path& dir) const {
    std::vector<std::shared_ptr<const RegistryShard>> shards;
    std::map<uint64_t, std::string> identities;
    {
        std::lock_guard lock(mu_);
        shards = shards_;
        identities = identities_;
    }
    write_registry_dir(dir, shards, identities);
}

std::unique_ptr<Registry> Registry::load(const std::filesystem::path& dir,
                                         std::shared_ptr<he::SlotBackend> backend,
                                         he::GaloisKeys galois) {
    auto out = std::make_unique<Registry>(std::move(backend), std::move(galois));
    Registry& r = *out;

    std::istringstream ids(read_text_file(dir / "identities.txt"));
    std::string line;
    if (!std::getline(ids, line) || line != identities_header)
        throw FormatError("identities file has an unknown header");
    while (std::getline(ids, line)) {
        if (line.empty()) continue;
        size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw FormatError("identities file line lacks an index,id pair");
        uint64_t index = 0;
        try {
            index = std::stoull(line.substr(0, comma));
        } catch (const std::exception&) {
            throw FormatError("identities file has a malformed index");
        }
        r.identities_[index] = line.substr(comma + 1);
    }

    std::istringstream occ(read_text_file(dir / "occupancy.txt"));
    if (!std::getline(occ, line) || line != occupancy_header)
        throw FormatError("occupancy file has an unknown header");
    while (std::getline(occ, line)) {
        if (line.empty()) continue;
        size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw FormatError("occupancy file line lacks an index,bits pair");
        uint32_t shard_index = 0;
        try {
            shard_index = static_cast<uint32_t>(std::stoul(line.substr(0, comma)));
        } catch (const std::exception&) {
            throw FormatError("occupancy file has a malformed shard index");
        }
        if (shard_index != r.shards_.size())
            throw FormatError("occupancy file shards are not sequential");
        auto shard = std::make_shared<RegistryShard>();
        shard->shard_index = shard_index;
        shard->occupancy = DynBitset::from_hex(line.substr(comma + 1), r.capacity_);
        shard->c_r = he::deserialize_ciphertext(read_file(shard_file(dir, shard_index)),
                                                *r.backend_->context());
        r.shards_.push_back(std::move(shard));
    }

    // Identity map and occupancy must agree bit for bit.
    size_t occupied = 0;
    for (const auto& shard : r.shards_) occupied += shard->occupancy.count();
    if (occupied != r.identities_.size())
        throw FormatError("identity map and occupancy bitsets disagree");
    for (const auto& [index, id] : r.identities_) {
        size_t shard_index = index / r.capacity_;
        if (shard_index >= r.shards_.size() ||
            !r.shards_[shard_index]->occupancy.get(index % r.capacity_))
            throw FormatError("identity at index " + std::to_string(index) +
                              " has no occupancy bit");
    }
    return out;
}

} // namespace hematch::registry
