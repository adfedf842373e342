//! Holds the end-to-end `acceptance` target; the library itself is empty.
