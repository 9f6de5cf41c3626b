//! Continuity suite (under construction).
