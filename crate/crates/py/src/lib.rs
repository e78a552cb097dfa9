//! Python bindings (filled in after the core stabilizes).
