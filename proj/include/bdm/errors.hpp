#pragma once

#include <stdexcept>
#include <string>

namespace bdm {

// Error taxonomy shared across the library. The CLI maps each category to a
// distinct exit message; everything derives from Error so callers can catch
// broadly.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class SchemaError : public Error { public: using Error::Error; };
class EmptyInputError : public Error { public: using Error::Error; };
class ValidationError : public Error { public: using Error::Error; };
class InsufficientDataError : public Error { public: using Error::Error; };
class UnidentifiableError : public Error { public: using Error::Error; };
class DegenerateDataError : public Error { public: using Error::Error; };
class ShapeError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };
class DomainError : public Error { public: using Error::Error; };

} // namespace bdm
