import { defineConfig } from 'vitest/config'

// base "./" keeps asset URLs relative so the built bundle works when the
// API service mounts it under /ui/ as well as from a bare file server.
export default defineConfig({
  base: './',
  build: {
    outDir: 'dist',
    sourcemap: false,
  },
  server: {
    proxy: {
      '/api': 'http://127.0.0.1:8000',
    },
  },
  test: {
    environment: 'jsdom',
    globalSetup: './tests/live-server.ts',
    testTimeout: 30000,
    hookTimeout: 60000,
  },
})
