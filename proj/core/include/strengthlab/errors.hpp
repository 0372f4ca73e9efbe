#pragma once

#include <stdexcept>
#include <string>

namespace strengthlab {

/// Base of every domain error. `code()` is a stable machine-readable tag that the
/// gateway maps one-to-one onto its structured error bodies.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define STRENGTHLAB_DEFINE_ERROR(Name, tag)                                   \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& message) : Error(tag, message) {}    \
    };

STRENGTHLAB_DEFINE_ERROR(InvalidArgument, "invalid_argument")
STRENGTHLAB_DEFINE_ERROR(KindMismatch, "kind_mismatch")
STRENGTHLAB_DEFINE_ERROR(OutOfRange, "out_of_range")
STRENGTHLAB_DEFINE_ERROR(SharedArgumentError, "shared_argument")
STRENGTHLAB_DEFINE_ERROR(UnknownTerm, "unknown_term")
STRENGTHLAB_DEFINE_ERROR(UnknownMethod, "unknown_method")
STRENGTHLAB_DEFINE_ERROR(InconsistentStore, "inconsistent_store")
STRENGTHLAB_DEFINE_ERROR(SemiAdditiveRefusal, "semi_additive_refusal")
STRENGTHLAB_DEFINE_ERROR(UnauthorizedConditioning, "unauthorized_conditioning")
STRENGTHLAB_DEFINE_ERROR(ZeroMassConditioning, "zero_mass_conditioning")
STRENGTHLAB_DEFINE_ERROR(UnsupportedOperation, "unsupported_operation")
STRENGTHLAB_DEFINE_ERROR(UnknownQuestion, "unknown_question")
STRENGTHLAB_DEFINE_ERROR(NotFound, "not_found")
STRENGTHLAB_DEFINE_ERROR(StaleVersion, "stale_version")
STRENGTHLAB_DEFINE_ERROR(StorageError, "storage_error")

#undef STRENGTHLAB_DEFINE_ERROR

}  // namespace strengthlab
