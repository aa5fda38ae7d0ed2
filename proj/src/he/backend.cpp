#include "hematch/he/backend.hpp"

namespace hematch::he {

std::unique_ptr<SlotBackend> make_lattice_backend(std::shared_ptr<const RingContext> ctx);
std::unique_ptr<SlotBackend> make_clear_backend(std::shared_ptr<const RingContext> ctx);

std::unique_ptr<SlotBackend> SlotBackend::create(const HeParams& params, BackendKind kind) {
    bool lattice = kind == BackendKind::lattice;
    auto ctx = make_context(params, /*build_tables=*/lattice);
    return lattice ? make_lattice_backend(std::move(ctx)) : make_clear_backend(std::move(ctx));
}

} // namespace hematch::he
