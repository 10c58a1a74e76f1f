import { defineConfig } from "vite";

// End-to-end config: spawns the Python teleoperation service, so the run
// needs the package installed in the active Python environment.
export default defineConfig({
  test: {
    include: ["tests/**/*.e2e.test.ts"],
    environment: "node",
    testTimeout: 120_000,
    hookTimeout: 60_000,
  },
});
