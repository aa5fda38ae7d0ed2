#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "hematch/he/ciphertext.hpp"
#include "hematch/he/context.hpp"
#include "hematch/he/keys.hpp"

namespace hematch::he {

// Slot arithmetic contract shared by the lattice and clear backends.  All
// operations are value-semantic and thread-safe: backends hold only immutable
// state after construction.
//
// Level/scale discipline (both backends):
//   - fresh ciphertexts sit at max_level with scale 2^scale_bits
//   - mul and mul_plain consume one level and rescale by the dropped prime
//   - add/sub/add_plain require equal levels and matching scales
//   - running out of levels raises DepthError, never a silent wrong answer
class SlotBackend {
public:
    static std::unique_ptr<SlotBackend> create(const HeParams& params, BackendKind kind);

    virtual ~SlotBackend() = default;

    const HeParams& params() const { return ctx_->params(); }
    uint64_t params_digest() const { return ctx_->params_digest(); }
    BackendKind kind() const { return kind_; }
    std::shared_ptr<const RingContext> context() const { return ctx_; }

    // Seeded generation is a test-profile convenience; the production profile
    // rejects it.
    virtual KeyBundle keygen(std::optional<uint64_t> seed = std::nullopt) const = 0;

    virtual Plaintext encode(std::span<const double> slots, int level, double scale) const = 0;
    virtual std::vector<double> decode(const Plaintext& p) const = 0;

    virtual Ciphertext encrypt(const Plaintext& p, const PublicKey& pk) const = 0;
    virtual std::vector<double> decrypt(const Ciphertext& c, const SecretKey& sk) const = 0;

    virtual Ciphertext add(const Ciphertext& a, const Ciphertext& b) const = 0;
    virtual Ciphertext sub(const Ciphertext& a, const Ciphertext& b) const = 0;
    virtual Ciphertext add_plain(const Ciphertext& a, const Plaintext& p) const = 0;
    virtual Ciphertext mul_plain(const Ciphertext& a, const Plaintext& p) const = 0;
    virtual Ciphertext mul(const Ciphertext& a, const Ciphertext& b, const RelinKey& rk) const = 0;

    // Cyclic slot rotation; positive steps rotate left.  Arbitrary steps are
    // composed from the power-of-two key set.
    virtual Ciphertext rotate(const Ciphertext& a, int steps, const GaloisKeys& gk) const = 0;

protected:
    SlotBackend(std::shared_ptr<const RingContext> ctx, BackendKind kind)
        : ctx_(std::move(ctx)), kind_(kind) {}

    std::shared_ptr<const RingContext> ctx_;
    BackendKind kind_;
};

} // namespace hematch::he
