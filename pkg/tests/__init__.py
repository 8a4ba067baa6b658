# Tests for surveil
