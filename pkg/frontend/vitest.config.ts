import { defineConfig } from "vitest/config"

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    testTimeout: 120_000,
    hookTimeout: 120_000,
    // suite order matters for wall-time reporting only; tests are independent
    sequence: { shuffle: false },
  },
})
