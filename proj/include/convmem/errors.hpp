#pragma once

#include <stdexcept>
#include <string>

namespace convmem {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
};

/// Precondition or invariant violation (bad arguments, duplicate ids, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Failure while talking to an embedding or chat backend.
class ProviderError : public Error {
public:
    ProviderError(const std::string& message, bool retriable)
        : Error(message), retriable_(retriable) {}

    bool retriable() const { return retriable_; }

private:
    bool retriable_;
};

/// Malformed data on an otherwise healthy channel (dim mismatch across a
/// batch, unparseable mock prompt, fingerprint mismatch on an index file).
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// The embedding cache file cannot be trusted; the caller must rebuild it.
class CacheCorruptionError : public Error {
public:
    using Error::Error;
};

/// A metric was requested on inputs for which it is undefined (empty gold).
class MetricError : public Error {
public:
    using Error::Error;
};

/// Dataset file could not be loaded or failed validation.
class LoadError : public Error {
public:
    using Error::Error;
};

} // namespace convmem
