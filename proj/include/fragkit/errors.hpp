#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fragkit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotADirectory : public Error {
 public:
  explicit NotADirectory(const std::string& path)
      : Error("not a directory: " + path), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Net-nonzero brace depth after comments and literals are treated opaquely.
class UnbalancedBraces : public Error {
 public:
  UnbalancedBraces(const std::string& path, std::size_t offset)
      : Error(path + ": unbalanced braces at byte " + std::to_string(offset)),
        path_(path),
        offset_(offset) {}
  const std::string& path() const { return path_; }
  std::size_t offset() const { return offset_; }

 private:
  std::string path_;
  std::size_t offset_;
};

class UnknownFragmentId : public Error {
 public:
  explicit UnknownFragmentId(const std::string& id)
      : Error("unknown fragment id: " + id), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

/// Malformed merge-table file; line is 1-based.
class FormatError : public Error {
 public:
  FormatError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyModel : public Error {
 public:
  using Error::Error;
};

class EmptyCorpus : public Error {
 public:
  explicit EmptyCorpus(const std::string& project)
      : Error("no parsable source files in " + project) {}
};

class DivisionByZero : public Error {
 public:
  using Error::Error;
};

class OutOfContext : public Error {
 public:
  OutOfContext(std::size_t mandatory_tokens, std::size_t reserved,
               std::size_t window)
      : Error("mandatory prompt needs " + std::to_string(mandatory_tokens) +
              " tokens + " + std::to_string(reserved) +
              " reserved, window is " + std::to_string(window)),
        mandatory_tokens_(mandatory_tokens) {}
  std::size_t mandatory_tokens() const { return mandatory_tokens_; }

 private:
  std::size_t mandatory_tokens_;
};

class BackendError : public Error {
 public:
  using Error::Error;
  virtual bool retryable() const { return true; }
};

class Timeout : public BackendError {
 public:
  using BackendError::BackendError;
};

class HttpStatus : public BackendError {
 public:
  HttpStatus(int code, const std::string& body)
      : BackendError("http status " + std::to_string(code) + ": " + body),
        code_(code) {}
  int code() const { return code_; }
  bool retryable() const override { return code_ == 429 || code_ >= 500; }

 private:
  int code_;
};

class MalformedResponse : public BackendError {
 public:
  using BackendError::BackendError;
};

/// Token cache returned a count different from a fresh computation.
class CacheMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace fragkit
