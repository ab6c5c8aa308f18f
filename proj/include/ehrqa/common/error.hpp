#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace ehrqa {

// Base of every data/contract error raised by the library. The CLI maps these
// to exit code 2; anything else escaping is an internal failure.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define EHRQA_DEFINE_ERROR(Name)                                \
  class Name : public Error {                                   \
   public:                                                      \
    explicit Name(const std::string& message)                   \
        : Error(#Name, message) {}                              \
  }

// corpus
EHRQA_DEFINE_ERROR(ParseError);
EHRQA_DEFINE_ERROR(MissingColumn);
EHRQA_DEFINE_ERROR(DuplicateId);
EHRQA_DEFINE_ERROR(TemplateExhausted);
EHRQA_DEFINE_ERROR(EmptyInput);
EHRQA_DEFINE_ERROR(InvalidArgument);
EHRQA_DEFINE_ERROR(IoError);

// tokenizer
EHRQA_DEFINE_ERROR(EmptyCorpus);
EHRQA_DEFINE_ERROR(UnknownId);

// noise
EHRQA_DEFINE_ERROR(IndexOutOfRange);
EHRQA_DEFINE_ERROR(NoAdjacency);
EHRQA_DEFINE_ERROR(WordTooShort);
EHRQA_DEFINE_ERROR(Unreachable);

// model
EHRQA_DEFINE_ERROR(TooLong);
EHRQA_DEFINE_ERROR(ShapeMismatch);
EHRQA_DEFINE_ERROR(NoLabels);
EHRQA_DEFINE_ERROR(EmptyTrainSet);

// engine
EHRQA_DEFINE_ERROR(UnknownTable);
EHRQA_DEFINE_ERROR(UnknownColumn);
EHRQA_DEFINE_ERROR(TypeMismatch);
EHRQA_DEFINE_ERROR(UnboundVariable);

// eval
EHRQA_DEFINE_ERROR(GoldUnexecutable);
EHRQA_DEFINE_ERROR(LengthMismatch);
EHRQA_DEFINE_ERROR(MetricLawViolation);

#undef EHRQA_DEFINE_ERROR

// Query text that does not fit the restricted grammar. `offset` is the byte
// offset into the original text where parsing stopped.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t offset)
      : Error("SyntaxError",
              message + " at byte " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace ehrqa
