import { defineConfig } from "vite";

export default defineConfig({
  server: { port: 5173 },
  build: { outDir: "dist", target: "es2020" },
  test: {
    include: ["tests/**/*.test.ts"],
    exclude: ["tests/**/*.e2e.test.ts", "node_modules/**"],
    environment: "node",
  },
});
